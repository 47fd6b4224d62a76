#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace varcalc {

/// Base class of every error thrown by this library.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Two objects living on different grids were combined.
struct grid_mismatch_error : error {
    using error::error;
};

/// Invalid sizes, intervals, quadrature settings or configuration values.
struct config_error : error {
    using error::error;
};

/// Requested operation is outside the supported range (seminorm order,
/// analytic densities for user expressions, non-separable kinetic form, ...).
struct unsupported_error : error {
    using error::error;
};

/// A variation field touches the endpoint margin of its time interval.
struct support_error : error {
    using error::error;
};

/// A Lagrangian evaluation produced a non-finite value; the message carries
/// the offending point.
struct evaluation_error : error {
    using error::error;
};

/// A time-stepping run exceeded the overflow guard.
struct divergence_error : error {
    divergence_error(const std::string& what, int step_index)
        : error(what), step(step_index) {}
    int step;
};

/// Expression or config text could not be parsed. `position` is the 0-based
/// character offset, `expected` a human-readable description of what would
/// have been accepted there.
struct parse_error : error {
    parse_error(const std::string& what, std::size_t pos, std::string expected_tokens)
        : error(what), position(pos), expected(std::move(expected_tokens)) {}
    std::size_t position;
    std::string expected;
};

/// File could not be read/written or has a malformed header.
struct io_error : error {
    using error::error;
};

/// A ladder study was asked to fit an order from fewer than 3 points.
struct insufficient_data_error : error {
    using error::error;
};

} // namespace varcalc
