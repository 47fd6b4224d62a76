#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

/// Time-sampled curve payload for file exchange; see docs/formats.md.
/// Header `# M N m a b`, then M+1 rows of the node time followed by the N*m
/// values of the sample, row-major over (node, component).
struct CurveData {
    TimeGrid tg;
    std::vector<GridFunction> samples;
};

inline void write_curve(std::ostream& os, const TimeGrid& tg,
                        const std::vector<GridFunction>& samples) {
    if (static_cast<int>(samples.size()) != tg.samples())
        throw config_error("write_curve: sample count does not match time grid");
    const PeriodicGrid& g = samples.front().grid();
    os << "# " << tg.steps << ' ' << g.nodes << ' ' << g.dim << ' '
       << detail::format_double(tg.t_begin) << ' ' << detail::format_double(tg.t_end) << '\n';
    for (int j = 0; j < tg.samples(); ++j) {
        os << detail::format_double(tg.node(j));
        const GridFunction& s = samples[static_cast<std::size_t>(j)];
        for (int i = 0; i < g.nodes; ++i)
            for (int c = 0; c < g.dim; ++c) os << ' ' << detail::format_double(s.at(i, c));
        os << '\n';
    }
}

inline CurveData read_curve(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("curve: missing header line");
    std::istringstream hs(line);
    char hash = 0;
    int steps = 0, n = 0, m = 0;
    double a = 0.0, b = 0.0;
    hs >> hash >> steps >> n >> m >> a >> b;
    if (hash != '#' || !hs) throw io_error("curve: malformed header, expected '# M N m a b'");
    TimeGrid tg(a, b, steps);
    PeriodicGrid g(n, m);
    std::vector<GridFunction> samples;
    samples.reserve(static_cast<std::size_t>(tg.samples()));
    for (int j = 0; j < tg.samples(); ++j) {
        if (!std::getline(is, line)) throw io_error("curve: truncated data");
        std::istringstream ls(line);
        double t = 0.0;
        if (!(ls >> t)) throw io_error("curve: row " + std::to_string(j) + " missing time column");
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(n) * m);
        double v = 0.0;
        for (int k = 0; k < n * m; ++k) {
            if (!(ls >> v)) throw io_error("curve: row " + std::to_string(j) + " is short");
            values.push_back(v);
        }
        samples.emplace_back(g, std::move(values));
    }
    return {tg, std::move(samples)};
}

inline void write_curve_file(const std::string& path, const TimeGrid& tg,
                             const std::vector<GridFunction>& samples) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_curve(os, tg, samples);
}

inline CurveData read_curve_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open for reading: " + path);
    return read_curve(is);
}

inline void write_grid_function_file(const std::string& path, const GridFunction& u) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    write_grid_function(os, u);
}

inline GridFunction read_grid_function_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open for reading: " + path);
    return read_grid_function(is);
}

/// Minimal comma-separated table writer; one header row, then data rows
/// formatted with "%.17g" so reruns are byte-identical.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& values) {
        if (values.size() != columns_.size())
            throw config_error("CsvTable: row width does not match header");
        rows_.push_back(values);
    }

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) os << ',';
            os << columns_[i];
        }
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                os << detail::format_double(row[i]);
            }
            os << '\n';
        }
    }

    void write_file(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw io_error("cannot open for writing: " + path);
        write(os);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

} // namespace varcalc
