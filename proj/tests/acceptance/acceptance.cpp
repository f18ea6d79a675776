// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <hybcs/equilibrium.hpp>
#include <hybcs/observables.hpp>
#include <hybcs/oracle/oracle.hpp>
#include <hybcs/parallel.hpp>

using namespace hybcs;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << id << ": " << what << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double x, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// log-log interpolation of a positive series at time t
double interp_log(const std::vector<double>& t, const std::vector<double>& y, double x) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] >= x) {
            const double f = std::log(x / t[i - 1]) / std::log(t[i] / t[i - 1]);
            return std::exp(std::log(y[i - 1]) + f * (std::log(y[i]) - std::log(y[i - 1])));
        }
    return y.back();
}

// max transverse pseudospin length of tracked mode m over samples with t in [lo, hi]
double transverse_amplitude(const TimeSeries& ts, std::size_t m, double lo, double hi) {
    const auto& t = ts.t_w();
    const auto& sx = ts.column("sx_" + std::to_string(m));
    const auto& sy = ts.column("sy_" + std::to_string(m));
    double a = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= lo && t[i] <= hi) a = std::max(a, std::hypot(sx[i], sy[i]));
    return a;
}

struct Model {
    BandGrid grid;
    GapSolution gap;
    BcsState ground;
    Model(std::size_t n, double u)
        : grid(build_flat_band(1.0, n)), gap(solve_gap(grid, u)), ground(build_ground_state(grid, gap)) {}
};

}  // namespace

int main() {
    const int workers = env_workers();
    const IntegratorSettings settings;  // rtol 1e-9, atol 1e-12
    const auto t_start = std::chrono::steady_clock::now();

    // 1. oracle
    {
        const auto t0 = std::chrono::steady_clock::now();
        oracle::OracleOptions o;
        o.seeds = 20;
        o.sites = 2;
        o.workers = workers;
        const auto rep = oracle::run_oracle(o);
        const double secs = seconds_since(t0);
        double eom = 0, hf = 0, slope = 0;
        for (const auto& c : rep.checks) {
            if (c.name == "eom_equivalence") eom = c.value;
            if (c.name == "hf_trace_identity") hf = c.value;
            if (c.name == "norm_conserving_slope") slope = c.value;
        }
        report("1 oracle", rep.passed() && eom <= 1e-10 && hf <= 1e-12 && slope <= 0.1 && secs <= 60,
               "eom residual " + fmt(eom) + ", hf residual " + fmt(hf) + ", |slope-2| " + fmt(slope) + ", " +
                   std::to_string(rep.checks.size()) + " checks in " + fmt(secs, 3) + " s");
    }

    Model m1(4096, 1.0), m05(4096, 0.5);

    // 2. equilibrium
    {
        double gap_err = 0;
        for (const Model* m : {&m05, &m1}) {
            const double u = m == &m1 ? 1.0 : 0.5;
            gap_err = std::max(gap_err, std::abs(m->gap.gap - 1.0 / (2.0 * std::sinh(1.0 / u))));
        }
        double drift = 0;
        for (const Model* m : {&m05, &m1}) {
            const double u = m == &m1 ? 1.0 : 0.5;
            SystemParams p{u, 0, 0, 1, 1, &m->grid};
            Protocol pr{0, 100, log_samples(0.01, 100, 100), {0, 1024, 2047, 2048, 3000, 4095}};
            auto ts = run_protocol(m->ground, p, pr, settings);
            for (std::size_t c = 1; c < ts.columns.size(); ++c)
                for (double v : ts.columns[c]) drift = std::max(drift, std::abs(v - ts.columns[c].front()));
            drift = std::max(drift, std::abs(ts.column("n").front() - 1.0));
        }
        report("2 equilibrium", drift <= 1e-8 && gap_err <= 1e-6,
               "max observable change " + fmt(drift) + " (<= 1e-8), gap error " + fmt(gap_err) + " (<= 1e-6)");
    }

    // 3 and 4 share the loss quench at |U|/W = 1, Γ/|U| = 0.08
    const SystemParams loss1{1.0, 0.08, 0, 1, 1, &m1.grid};
    const SystemParams loss0{1.0, 0.08, 0, 0, 0, &m1.grid};
    TimeSeries lind, nh;
    {
        std::vector<std::size_t> all(m1.grid.n_modes());
        for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
        const Protocol p3{0, 2000, log_samples(0.01, 2000, 480), {}};
        const Protocol p4{0, 1000, log_samples(0.01, 1000, 400), all};
        parallel_for(2, workers, [&](std::size_t i) {
            if (i == 0) lind = run_protocol(m1.ground, loss1, p3, settings);
            else nh = run_protocol(m1.ground, loss0, p4, settings);
        });
    }

    // 3. Lindblad loss exponents
    {
        const auto& t = lind.t_w();
        const auto fn = fit_power_law(t, lind.column("n"), 100, 1000);
        const auto fd = fit_power_law(t, lind.column("abs_delta"), 100, 1000);
        const double dn = window_doubling_drift(t, lind.column("n"), 100, 1000);
        const double dd = window_doubling_drift(t, lind.column("abs_delta"), 100, 1000);
        report("3a lindblad density exponent", std::abs(fn.exponent + 1.0) <= 0.05,
               "n ~ t^" + fmt(fn.exponent) + " on tW [100,1000] (want -1.00 +- 0.05), r2 " + fmt(fn.r_squared));
        report("3b lindblad gap exponent", std::abs(fd.exponent + 2.0) <= 0.1,
               "|Delta| ~ t^" + fmt(fd.exponent) + " on tW [100,1000] (want -2.0 +- 0.1), r2 " + fmt(fd.r_squared));
        report("3c window doubling", dn < 0.1 && dd < 0.1,
               "exponent drift [100,1000] -> [200,2000]: n " + fmt(dn) + ", |Delta| " + fmt(dd) + " (< 0.1)");
    }

    // 4. non-Hermitian limit
    {
        double zdev = 0;
        for (std::size_t m = 0; m < nh.tracked_modes.size(); ++m)
            for (double z : nh.column("zeta_" + std::to_string(m))) zdev = std::max(zdev, std::abs(z - 1.0));
        report("4a pseudospin length", zdev <= 1e-8,
               "max_k,t |zeta_k - 1| = " + fmt(zdev) + " over all 4096 modes (<= 1e-8)");

        const auto pl = detect_plateau(nh.t_w(), nh.column("n"));
        report("4b plateau", pl.found && pl.t_start < 100,
               std::string(pl.found ? "found" : "not found") + "; flattest window [" + fmt(pl.t_start) + ", " +
                   fmt(pl.t_end) + "] slope " + fmt(pl.slope_bound) + " (threshold 0.02), n " + fmt(pl.value));

        const auto fd = fit_power_law(nh.t_w(), nh.column("abs_delta"), 100, 1000);
        report("4c non-hermitian gap exponent", std::abs(fd.exponent + 1.0) <= 0.1,
               "|Delta| ~ t^" + fmt(fd.exponent) + " on tW [100,1000] (want -1.0 +- 0.1), r2 " + fmt(fd.r_squared));

        const double tm = std::sqrt(pl.t_start * pl.t_end);
        const double n_lind = interp_log(lind.t_w(), lind.column("n"), tm);
        report("4d plateau above lindblad density", pl.value > n_lind,
               "plateau n " + fmt(pl.value) + " vs alpha=1 n " + fmt(n_lind) + " at tW " + fmt(tm));
    }

    // 5. hybrid interpolation
    {
        const std::vector<double> alphas = {1.0, 0.5, 0.1, 0.01, 0.0};
        std::vector<double> cross(alphas.size(), NAN);
        const Protocol pr{0, 30, linear_samples(30, 3001), {}};
        parallel_for(alphas.size(), workers, [&](std::size_t i) {
            SystemParams p = loss1;
            p.alpha_loss = p.alpha_pump = alphas[i];
            auto ts = run_protocol(m1.ground, p, pr, settings);
            if (auto c = first_crossing_below(ts.t_w(), ts.column("n"), 0.5)) cross[i] = *c;
        });
        bool ok = true;
        std::string s;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            s += (i ? ", " : "") + fmt(alphas[i]) + ":" + fmt(cross[i]);
            if (!std::isfinite(cross[i]) || (i > 0 && !(cross[i] > cross[i - 1]))) ok = false;
        }
        report("5 hybrid interpolation", ok, "tW(n = 0.5) by alpha " + s + " (strictly increasing)");
    }

    // 6. Zeno
    {
        const std::vector<double> gammas = {0.04, 0.08, 0.16, 0.32};
        const Protocol pr{0, 1000, log_samples(0.01, 1000, 400), {}};
        SystemParams base = loss0;
        auto z = zeno_scan(gammas, m1.ground, base, pr, settings, {}, workers);
        bool ok = true;
        std::string s;
        for (std::size_t i = 0; i < z.size(); ++i) {
            s += (i ? ", " : "") + fmt(z[i].gamma) + ":" + fmt(z[i].plateau.value) +
                 (z[i].plateau.found ? "" : "*");
            if (i > 0 && !(z[i].plateau.value > z[i - 1].plateau.value)) ok = false;
        }
        report("6 zeno", ok, "plateau n by gamma/|U| " + s + " (strictly increasing; * = flattest point, no window under 0.02)");
    }

    // 7. balanced drive
    {
        const std::vector<double> alphas = {1.0, 0.5, 0.0};
        // tracked pairs at ±0.05, ±0.2, ±0.4 in units of W
        std::vector<std::size_t> modes;
        for (double e : {-0.4, -0.2, -0.05, 0.05, 0.2, 0.4}) modes.push_back(m1.grid.nearest_mode(e));
        const Protocol pr{0, 1000, linear_samples(1000, 10001), modes};
        std::vector<TimeSeries> runs(alphas.size());
        parallel_for(alphas.size(), workers, [&](std::size_t i) {
            SystemParams p{1.0, 0.08, 0.08, alphas[i], alphas[i], &m1.grid};
            runs[i] = run_protocol(m1.ground, p, pr, settings);
        });

        double ndev = 0;
        for (const auto& ts : runs)
            for (double n : ts.column("n")) ndev = std::max(ndev, std::abs(n - 1.0));
        report("7a balanced density", ndev <= 1e-10, "max |n - 1| over alpha {1, 0.5, 0} = " + fmt(ndev));

        const auto& l = runs[0];
        double occ = 0, trans = 0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            occ = std::max(occ, std::abs(0.5 * l.column("sz_" + std::to_string(m)).back()));
            trans = std::max(trans, std::hypot(l.column("sx_" + std::to_string(m)).back(),
                                               l.column("sy_" + std::to_string(m)).back()));
        }
        report("7b lindblad balanced relaxation", occ <= 1e-3 && trans < 1e-3,
               "final max |n_k - 1/2| " + fmt(occ) + ", max transverse length " + fmt(trans) + " (both < 1e-3)");

        const auto& h = runs[2];
        double zdev = 0;
        for (double z : h.column("zeta_mean")) zdev = std::max(zdev, std::abs(z - 1.0));
        report("7c1 balanced zeta", zdev <= 1e-8, "max |zeta_mean - 1| = " + fmt(zdev));
        double worst = 1e300;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const double a0 = transverse_amplitude(h, m, 0, 10), a1 = transverse_amplitude(h, m, 990, 1000);
            worst = std::min(worst, a1 / a0);
        }
        report("7c2 undamped oscillation", worst >= 0.5,
               "min final/initial transverse amplitude " + fmt(worst) + " (>= 0.5)");
        const auto fd = fit_power_law(h.t_w(), h.column("abs_delta"), 100, 1000);
        report("7c3 balanced gap exponent", std::abs(fd.exponent + 1.0) <= 0.2,
               "|Delta| ~ t^" + fmt(fd.exponent) + " on tW [100,1000] (want -1.0 +- 0.2), r2 " + fmt(fd.r_squared));
        const auto inv = population_inversion_time(h);
        report("7c4 population inversion", inv.has_value(),
               inv ? "inversion at tW " + fmt(*inv) : std::string("no inversion found"));
    }

    // 8. duality and determinism
    {
        std::mt19937_64 rng(20240601);
        std::uniform_real_distribution<double> u(0, 1);
        std::normal_distribution<double> gs;
        const auto& g = m1.grid;
        double worst = 0;
        for (int trial = 0; trial < 100; ++trial) {
            BcsState s;
            for (std::size_t j = 0; j < g.n_modes(); ++j) {
                double x = gs(rng), y = gs(rng), z = gs(rng);
                const double r = u(rng) / std::sqrt(x * x + y * y + z * z);
                s.n.push_back(0.5 * (1 + r * z));
                s.d.push_back(0.5 * r * cplx(x, y));
            }
            const double a = u(rng), b = u(rng), al = u(rng), ap = u(rng), uu = 0.5 + u(rng);
            SystemParams p{uu, a, b, al, ap, &g}, q{uu, b, a, ap, al, &g};
            auto lhs = particle_hole_transform(rhs_total(s, p), g);
            auto rhs = rhs_total(particle_hole_transform(s, g), q);
            for (std::size_t j = 0; j < g.n_modes(); ++j)
                worst = std::max({worst, std::abs(lhs.dn[j] - rhs.dn[j]), std::abs(lhs.dd[j] - rhs.dd[j])});
        }
        report("8a particle-hole duality", worst <= 1e-12, "max residual " + fmt(worst) + " over 100 random states");

        SystemParams p{1.0, 0.08, 0.04, 0.3, 0.3, &g};
        const Protocol pr{0, 100, log_samples(0.01, 100, 100), {100, 2000, 3995}};
        auto a = run_protocol(m1.ground, p, pr, settings);
        auto b = run_protocol(m1.ground, p, pr, settings);
        report("8b bit-identical reruns", a.columns == b.columns, a.columns == b.columns ? "identical" : "differ");
        IntegratorSettings threaded = settings;
        threaded.threads = 4;
        auto c = run_protocol(m1.ground, p, pr, threaded);
        double diff = 0;
        for (std::size_t k = 0; k < a.columns.size(); ++k)
            for (std::size_t i = 0; i < a.rows(); ++i) diff = std::max(diff, std::abs(a.columns[k][i] - c.columns[k][i]));
        report("8c thread-count agreement", diff <= 1e-12, "max difference 1 vs 4 threads " + fmt(diff));
    }

    std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed"
                           : std::string("acceptance: all criteria passed"))
              << " (" << fmt(seconds_since(t_start), 4) << " s)" << std::endl;
    return failures ? 1 : 0;
}
