#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "equilibrium.hpp"
#include "integrator.hpp"
#include "io/config.hpp"
#include "io/csv.hpp"
#include "observables.hpp"
#include "oracle/oracle.hpp"
#include "parallel.hpp"

namespace hybcs::cli {

enum Exit { kOk = 0, kConfigError = 2, kIntegrationError = 3, kOracleFailure = 4 };

struct RunResult {
    TimeSeries series;
    json sidecar;
};

inline RunResult execute(const ResolvedRun& run, const BcsState& initial) {
    RunResult r;
    r.series = run_protocol(initial, run.params, run.protocol, run.settings);
    r.sidecar = sidecar_json(run, r.series);
    return r;
}

inline BcsState initial_state(const ResolvedRun& run) {
    return build_ground_state(*run.grid, solve_gap(*run.grid, run.params.u));
}

inline void write_outputs(const RunResult& r, const std::string& csv) {
    const auto parent = std::filesystem::path(csv).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    write_series_csv(r.series, csv);
    std::ofstream js(sidecar_path(csv));
    js << r.sidecar.dump(2) << '\n';
}

struct RunOptions {
    std::string config;
    std::optional<std::string> output;  // overrides output.path
    int threads = 1;
};

inline int cmd_run(const RunOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        RunConfig cfg = load_config(o.config);
        if (o.output) cfg.output.path = *o.output;
        const ResolvedRun run = resolve(cfg, o.threads);
        const auto res = execute(run, initial_state(run));
        write_outputs(res, cfg.output.path);
        out << "wrote " << cfg.output.path << " (" << res.series.rows() << " rows, "
            << res.series.stats.steps << " steps, " << res.series.stats.rejections << " rejected)\n";
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NoSolutionError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IntegrationError& e) {
        err << "integration failure at t_w = " << e.t << ": " << e.what() << '\n';
        return kIntegrationError;
    }
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        std::size_t used = 0;
        double x;
        try {
            x = std::stod(cell, &used);
        } catch (...) {
            throw ConfigError("'" + cell + "' is not a number");
        }
        if (used != cell.size()) throw ConfigError("'" + cell + "' is not a number");
        v.push_back(x);
    }
    return v;
}

struct ScanOptions {
    std::string config;
    std::string axis;
    std::vector<double> values;
    std::optional<std::string> out_dir;
    int workers = 1;
    int threads = 1;
};

struct ScanRow {
    double value = 0;
    std::string status = "ok";
    double n_final = NAN, abs_delta_final = NAN, zeta_mean_final = NAN;
    double t_half_w = NAN;
    double density_exponent = NAN, delta_exponent = NAN;
    bool plateau_found = false;
    double plateau_value = NAN;
};

// Late-time window used for scan summaries: [100, 1000] or the last decade.
inline std::pair<double, double> summary_window(double t_max_w) {
    if (t_max_w >= 1000) return {100, 1000};
    return {t_max_w / 10, t_max_w};
}

inline ScanRow summarize(double value, const TimeSeries& ts, double t_max_w) {
    ScanRow r;
    r.value = value;
    const auto& t = ts.t_w();
    r.n_final = ts.column("n").back();
    r.abs_delta_final = ts.column("abs_delta").back();
    r.zeta_mean_final = ts.column("zeta_mean").back();
    if (auto c = first_crossing_below(t, ts.column("n"), 0.5)) r.t_half_w = *c;
    auto [lo, hi] = summary_window(t_max_w);
    try {
        r.density_exponent = fit_power_law(t, ts.column("n"), lo, hi).exponent;
    } catch (const FitError&) {
    }
    try {
        r.delta_exponent = fit_power_law(t, ts.column("abs_delta"), lo, hi).exponent;
    } catch (const FitError&) {
    }
    auto pl = detect_plateau(t, ts.column("n"));
    r.plateau_found = pl.found;
    r.plateau_value = pl.value;
    return r;
}

inline int cmd_scan(const ScanOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig base;
    ResolvedRun run0;
    BcsState init;
    try {
        if (o.axis != "alpha" && o.axis != "gamma" && o.axis != "pump")
            throw ConfigError("--axis must be alpha, gamma or pump");
        if (o.values.empty()) throw ConfigError("--values must list at least one value");
        base = load_config(o.config);
        run0 = resolve(base, o.threads);
        init = initial_state(run0);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NoSolutionError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    const std::string dir = o.out_dir.value_or(
        (std::filesystem::path(base.output.path).parent_path() /
         (std::filesystem::path(base.output.path).stem().string() + "_scan"))
            .string());
    std::filesystem::create_directories(dir);

    std::vector<ScanRow> rows(o.values.size());
    parallel_for(o.values.size(), o.workers, [&](std::size_t i) {
        const double v = o.values[i];
        RunConfig c = base;
        if (o.axis == "alpha") {
            c.dissipation.alpha = v;
            c.dissipation.alpha_pump = v;
        } else if (o.axis == "gamma") {
            c.dissipation.gamma_over_u = v;
        } else {
            c.dissipation.p_over_u = v;
        }
        c.output.path = (std::filesystem::path(dir) / ("run_" + std::to_string(i) + ".csv")).string();
        try {
            if (!(v >= 0) || (o.axis == "alpha" && v > 1)) throw ConfigError(o.axis + " value out of range");
            ResolvedRun run = run0;  // shares the grid
            run.config = c;
            run.params.gamma = c.dissipation.gamma_over_u * run.params.u;
            run.params.pump = c.dissipation.p_over_u * run.params.u;
            run.params.alpha_loss = c.dissipation.alpha;
            run.params.alpha_pump = c.alpha_pump();
            const auto res = execute(run, init);
            write_outputs(res, c.output.path);
            rows[i] = summarize(v, res.series, c.time.t_max_w);
        } catch (const std::exception& e) {
            rows[i].value = v;
            rows[i].status = std::string("failed: ") + e.what();
        }
    });

    const std::string summary = (std::filesystem::path(dir) / "summary.csv").string();
    std::ofstream s(summary);
    s << "index," << o.axis
      << ",status,n_final,abs_delta_final,zeta_mean_final,t_half_w,density_exponent,delta_exponent,"
         "plateau_found,plateau_value\n";
    bool any_failed = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        any_failed |= r.status != "ok";
        std::string status = r.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        s << i << ',' << format_double(r.value) << ',' << status << ',' << format_double(r.n_final) << ','
          << format_double(r.abs_delta_final) << ',' << format_double(r.zeta_mean_final) << ','
          << format_double(r.t_half_w) << ',' << format_double(r.density_exponent) << ','
          << format_double(r.delta_exponent) << ',' << (r.plateau_found ? 1 : 0) << ','
          << format_double(r.plateau_value) << '\n';
    }
    out << "wrote " << rows.size() << " runs and " << summary << '\n';
    if (any_failed) {
        err << "some scan runs failed; see " << summary << '\n';
        return kIntegrationError;
    }
    return kOk;
}

struct FitOptions {
    std::string input;
    std::string column;
    double t_lo = 0, t_hi = 0;
    std::optional<std::string> json_out;
};

inline int cmd_fit(const FitOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const Table t = read_series_csv(o.input);
        const auto f = fit_power_law(t.column("t_w"), t.column(o.column), o.t_lo, o.t_hi);
        const auto drift_ok = 2 * o.t_hi <= t.column("t_w").back();
        json j = {{"column", o.column},       {"exponent", f.exponent}, {"intercept", f.intercept},
                  {"r_squared", f.r_squared}, {"window", {f.t_lo, f.t_hi}}, {"samples", f.samples}};
        if (drift_ok) j["window_doubling_drift"] = window_doubling_drift(t.column("t_w"), t.column(o.column), o.t_lo, o.t_hi);
        out << o.column << ": exponent " << f.exponent << " (r^2 " << f.r_squared << ", " << f.samples
            << " samples on [" << f.t_lo << ", " << f.t_hi << "])\n";
        out << j.dump() << '\n';
        if (o.json_out) std::ofstream(*o.json_out) << j.dump(2) << '\n';
        return kOk;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kConfigError;
    } catch (const FitError& e) {
        err << "fit error: " << e.what() << '\n';
        return kConfigError;
    }
}

struct OracleCliOptions {
    int seeds = 20;
    int sites = 2;
    std::string inject_fault;  // test-only
    int workers = 1;
};

inline int cmd_oracle(const OracleCliOptions& o, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    oracle::OracleOptions opt;
    opt.seeds = o.seeds;
    opt.sites = o.sites;
    opt.workers = o.workers;
    if (!o.inject_fault.empty()) {
        opt.fault = oracle::parse_term(o.inject_fault);
        if (!opt.fault) {
            err << "config error: unknown term '" << o.inject_fault << "'\n";
            return kConfigError;
        }
    }
    oracle::OracleReport rep;
    try {
        rep = oracle::run_oracle(opt);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    for (const auto& c : rep.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  value " << c.value << "  threshold " << c.threshold;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << '\n';
    }
    out << (rep.passed() ? "oracle: all checks passed\n" : "oracle: FAILED\n");
    return rep.passed() ? kOk : kOracleFailure;
}

}  // namespace hybcs::cli
