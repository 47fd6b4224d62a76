#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "varcalc/calculus.hpp"
#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/lagrangian.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

/// Line-oriented `key = value` configuration with `[section]` headers and `#`
/// comments; see docs/grammar.md. Keys are addressed as "section.key".
class ConfigFile {
public:
    static ConfigFile load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw io_error("cannot open config file: " + path);
        std::ostringstream buf;
        buf << is.rdbuf();
        return parse_text(buf.str(), path);
    }

    static ConfigFile parse_text(std::string_view text, const std::string& source = "<config>") {
        ConfigFile cfg;
        std::string section;
        int lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            std::string_view line = text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
            pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
            ++lineno;

            std::size_t hash = line.find('#');
            if (hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;

            if (line.front() == '[') {
                if (line.back() != ']')
                    throw config_error(source + ":" + std::to_string(lineno)
                                       + ": malformed section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section.empty() || !valid_name(section))
                    throw config_error(source + ":" + std::to_string(lineno)
                                       + ": invalid section name");
                continue;
            }

            std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw config_error(source + ":" + std::to_string(lineno)
                                   + ": expected 'key = value'");
            std::string key(trim(line.substr(0, eq)));
            std::string value(trim(line.substr(eq + 1)));
            if (key.empty() || !valid_name(key))
                throw config_error(source + ":" + std::to_string(lineno) + ": invalid key name");
            std::string full = section.empty() ? key : section + "." + key;
            if (cfg.entries_.count(full))
                throw config_error(source + ":" + std::to_string(lineno) + ": duplicate key "
                                   + full);
            cfg.entries_[full] = value;
            continue;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw config_error("missing required config field " + key);
        touched_.insert(key);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& dflt) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return dflt;
        touched_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double dflt) const {
        return has(key) ? get_double(key) : dflt;
    }

    int get_int(const std::string& key) const { return to_int(key, get_string(key)); }
    int get_int(const std::string& key, int dflt) const { return has(key) ? get_int(key) : dflt; }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        if (!has(key)) return dflt;
        std::string v = get_string(key);
        std::uint64_t out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw config_error("field " + key + ": expected an unsigned integer, got '" + v + "'");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key) const {
        std::string v = get_string(key);
        std::vector<int> out;
        std::size_t start = 0;
        while (start <= v.size()) {
            std::size_t comma = v.find(',', start);
            std::string item(trim(std::string_view(v).substr(
                start, comma == std::string::npos ? comma : comma - start)));
            if (!item.empty()) out.push_back(to_int(key, item));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (out.empty()) throw config_error("field " + key + ": expected a comma-separated list");
        return out;
    }

    /// Keys present in the file that were never read; the CLI treats these as
    /// configuration errors so typos do not pass silently.
    std::vector<std::string> untouched_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (!touched_.count(k)) out.push_back(k);
        return out;
    }

private:
    static std::string_view trim(std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    }

    static bool valid_name(const std::string& s) {
        if (s.empty()) return false;
        if (!std::isalpha(static_cast<unsigned char>(s.front())) && s.front() != '_') return false;
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        return true;
    }

    static double to_double(const std::string& key, const std::string& v) {
        try {
            std::size_t consumed = 0;
            double out = std::stod(v, &consumed);
            if (consumed != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw config_error("field " + key + ": expected a number, got '" + v + "'");
        }
    }

    static int to_int(const std::string& key, const std::string& v) {
        int out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw config_error("field " + key + ": expected an integer, got '" + v + "'");
        return out;
    }

    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> touched_;
};

/// The common configuration every CLI subcommand starts from.
struct RunConfig {
    LagrangianSpec lagrangian;
    PeriodicGrid grid;
    TimeGrid time;
    Quadrature quadrature;
    DiffConfig diff;
    std::uint64_t seed = 0;
    ConfigFile file;
};

inline RunConfig parse_run_config(ConfigFile cfg) {
    RunConfig rc;
    rc.file = std::move(cfg);
    const ConfigFile& f = rc.file;

    std::string kind = f.get_string("lagrangian.kind", "free");
    if (kind == "free")
        rc.lagrangian = LagrangianSpec::free_particle();
    else if (kind == "harmonic")
        rc.lagrangian = LagrangianSpec::harmonic_field(f.get_double("lagrangian.omega", 1.0));
    else if (kind == "wave")
        rc.lagrangian = LagrangianSpec::wave(f.get_double("lagrangian.c", 1.0));
    else if (kind == "sine_gordon")
        rc.lagrangian = LagrangianSpec::sine_gordon(f.get_double("lagrangian.c", 1.0),
                                                    f.get_double("lagrangian.beta", 1.0));
    else if (kind == "user") {
        try {
            rc.lagrangian = LagrangianSpec::user_density(f.get_string("lagrangian.density"));
        } catch (const parse_error& e) {
            throw config_error(std::string("field lagrangian.density: ") + e.what());
        }
    } else {
        throw config_error("field lagrangian.kind: unknown kind '" + kind
                           + "' (expected free, harmonic, wave, sine_gordon or user)");
    }
    if (f.has("lagrangian.spatial_order"))
        rc.lagrangian = rc.lagrangian.with_spatial_fd_order(f.get_int("lagrangian.spatial_order"));

    try {
        rc.grid = PeriodicGrid(f.get_int("grid.n", 64), f.get_int("grid.m", 1));
    } catch (const config_error& e) {
        throw config_error(std::string("field grid.n/grid.m: ") + e.what());
    }
    try {
        rc.time = TimeGrid(f.get_double("time.a", 0.0), f.get_double("time.b", 1.0),
                           f.get_int("time.steps", 64));
    } catch (const config_error& e) {
        throw config_error(std::string("field time.a/time.b/time.steps: ") + e.what());
    }

    std::string rule = f.get_string("quadrature.rule", "simpson");
    if (rule == "simpson")
        rc.quadrature = Quadrature::simpson();
    else if (rule == "gauss")
        rc.quadrature = Quadrature::gauss(f.get_int("quadrature.gauss_points", 3));
    else
        throw config_error("field quadrature.rule: unknown rule '" + rule
                           + "' (expected simpson or gauss)");
    if (rc.quadrature.rule == Quadrature::Rule::CompositeSimpson && rc.time.steps % 2 != 0)
        throw config_error("field time.steps: composite Simpson requires an even step count, got "
                           + std::to_string(rc.time.steps));

    std::string backend = f.get_string(
        "diff.backend", rc.lagrangian.has_analytic_densities() ? "analytic" : "fd");
    if (backend == "analytic") {
        if (!rc.lagrangian.has_analytic_densities())
            throw config_error("field diff.backend: analytic backend requires a builtin Lagrangian");
        rc.diff.backend = DiffConfig::Backend::Analytic;
    } else if (backend == "fd") {
        rc.diff.backend = DiffConfig::Backend::FiniteDifference;
    } else {
        throw config_error("field diff.backend: expected analytic or fd, got '" + backend + "'");
    }
    rc.diff.fd_step = f.get_double("diff.step", rc.diff.fd_step);
    rc.diff.fd_floor = f.get_double("diff.floor", rc.diff.fd_floor);
    rc.diff.fd_order = f.get_int("diff.order", rc.diff.fd_order);
    if (rc.diff.fd_order != 2 && rc.diff.fd_order != 4)
        throw config_error("field diff.order: expected 2 or 4");
    if (!(rc.diff.fd_step > 0.0) || !(rc.diff.fd_floor > 0.0))
        throw config_error("field diff.step/diff.floor: steps must be positive");

    rc.seed = f.get_u64("run.seed", 0);
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    return parse_run_config(ConfigFile::load(path));
}

} // namespace varcalc
