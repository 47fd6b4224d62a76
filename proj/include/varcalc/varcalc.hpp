#pragma once

// Umbrella header for the variational-calculus engine.

#include "varcalc/action.hpp"
#include "varcalc/calculus.hpp"
#include "varcalc/config.hpp"
#include "varcalc/dubois_reymond.hpp"
#include "varcalc/el_solver.hpp"
#include "varcalc/error.hpp"
#include "varcalc/expression.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/io.hpp"
#include "varcalc/lagrangian.hpp"
#include "varcalc/random.hpp"
#include "varcalc/time_grid.hpp"
#include "varcalc/weak_integral.hpp"
