#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "../errors.hpp"
#include "../integrator.hpp"
#include "config.hpp"

namespace hybcs {

// shortest representation that parses back to the same double
inline std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) return "nan";
    return std::string(buf, p);
}

inline void write_series_csv(const TimeSeries& ts, std::ostream& out) {
    for (std::size_t c = 0; c < ts.names.size(); ++c) out << (c ? "," : "") << ts.names[c];
    out << '\n';
    for (std::size_t r = 0; r < ts.rows(); ++r) {
        for (std::size_t c = 0; c < ts.columns.size(); ++c) out << (c ? "," : "") << format_double(ts.columns[c][r]);
        out << '\n';
    }
}

inline void write_series_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_series_csv(ts, out);
}

struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return columns[i];
        throw SchemaError("no column named '" + name + "'");
    }
};

// Header must be the fixed prefix followed by groups of four per tracked mode.
inline void check_series_header(const std::vector<std::string>& names) {
    const auto core = series_header(0);
    if (names.size() < core.size() || (names.size() - core.size()) % 4 != 0)
        throw SchemaError("unexpected number of columns");
    const auto expect = series_header((names.size() - core.size()) / 4);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] != expect[i])
            throw SchemaError("column " + std::to_string(i) + " is '" + names[i] + "', expected '" + expect[i] + "'");
}

inline Table read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty file");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            t.names.push_back(cell);
        }
    }
    check_series_header(t.names);
    t.columns.resize(t.names.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= t.names.size()) throw SchemaError("row " + std::to_string(row) + " has too many fields");
            double v;
            const char* b = cell.data();
            const char* e = b + cell.size();
            while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
            auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || p != e)
                throw SchemaError("row " + std::to_string(row) + ": '" + cell + "' is not a number");
            t.columns[c++].push_back(v);
        }
        if (c != t.names.size()) throw SchemaError("row " + std::to_string(row) + " has too few fields");
    }
    return t;
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json sidecar_json(const ResolvedRun& run, const TimeSeries& ts) {
    json j;
    j["version"] = kVersion;
    j["config"] = to_json(run.config);
    j["grid_checksum"] = hex64(run.grid->checksum());
    json modes = json::array();
    for (std::size_t m = 0; m < ts.tracked_modes.size(); ++m)
        modes.push_back({{"column_suffix", m},
                         {"mode_index", ts.tracked_modes[m]},
                         {"energy_w", ts.tracked_energies[m] / run.grid->bandwidth}});
    j["tracked_modes"] = modes;
    j["integrator"] = {{"steps", ts.stats.steps},
                       {"rejections", ts.stats.rejections},
                       {"rhs_evaluations", ts.stats.rhs_evals},
                       {"threads", run.settings.threads}};
    j["physicality"] = {{"max_zeta", ts.max_zeta}, {"min_nk", ts.min_nk}, {"max_nk", ts.max_nk}};
    return j;
}

// run.csv -> run.json
inline std::string sidecar_path(const std::string& csv_path) {
    const auto dot = csv_path.find_last_of('.');
    const auto slash = csv_path.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return csv_path.substr(0, dot) + ".json";
    return csv_path + ".json";
}

}  // namespace hybcs
