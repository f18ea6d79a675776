#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "parallel.hpp"

namespace hybcs {

struct Pseudospin {
    double sx, sy, sz, zeta;
};

struct PseudospinSummary {
    std::vector<Pseudospin> modes;
    double zeta_mean;
};

inline Pseudospin pseudospin(double nk, cplx dk) {
    Pseudospin s{2.0 * dk.real(), 2.0 * dk.imag(), 2.0 * nk - 1.0, 0};
    s.zeta = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
    return s;
}

inline PseudospinSummary pseudospin(const BcsState& s, const BandGrid& g) {
    PseudospinSummary out;
    out.modes.reserve(s.size());
    std::vector<double> z(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        out.modes.push_back(pseudospin(s.n[j], s.d[j]));
        z[j] = out.modes.back().zeta;
    }
    out.zeta_mean = detail::fixed_sum(g.weights, z);
    return out;
}

struct PowerLawFit {
    double exponent = 0;
    double intercept = 0;
    double r_squared = 0;
    double t_lo = 0, t_hi = 0;
    std::size_t samples = 0;
};

// Least squares of ln y against ln t on samples with t in [t_lo, t_hi].
inline PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y,
                                 double t_lo, double t_hi) {
    if (!(t_lo < t_hi)) throw FitError("fit window needs t_lo < t_hi");
    if (t.size() != y.size()) throw FitError("time and value columns differ in length");
    // logs are taken of y relative to the first in-window sample, so rescaling y by
    // a power of two leaves the exponent bit-identical
    std::vector<double> x, z;
    double ref = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(y[i] > 0) || !(t[i] > 0)) throw FitError("power-law fit needs strictly positive data");
        if (x.empty()) ref = y[i];
        x.push_back(std::log(t[i]));
        z.push_back(std::log(y[i] / ref));
    }
    if (x.size() < 10) throw FitError("power-law fit needs at least 10 samples in the window");
    const double m = static_cast<double>(x.size());
    double mx = 0, mz = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], mz += z[i];
    mx /= m;
    mz /= m;
    double sxx = 0, sxz = 0, szz = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxz += (x[i] - mx) * (z[i] - mz);
        szz += (z[i] - mz) * (z[i] - mz);
    }
    PowerLawFit f;
    f.exponent = sxz / sxx;
    f.intercept = std::log(ref) + mz - f.exponent * mx;
    f.r_squared = szz > 0 ? (sxz * sxz) / (sxx * szz) : 1.0;
    f.t_lo = t_lo;
    f.t_hi = t_hi;
    f.samples = x.size();
    return f;
}

// |exponent on [lo, hi] - exponent on [2 lo, 2 hi]|; stable under doubling means power law
inline double window_doubling_drift(const std::vector<double>& t, const std::vector<double>& y,
                                    double t_lo, double t_hi) {
    return std::abs(fit_power_law(t, y, t_lo, t_hi).exponent -
                    fit_power_law(t, y, 2 * t_lo, 2 * t_hi).exponent);
}

struct PlateauOptions {
    double slope_threshold = 0.02;
    double min_window_ratio = 2.0;
    // a plateau has to be preceded by change: drop the flat run that starts at
    // the first sample unless it spans the whole series
    bool skip_leading = true;
};

struct PlateauReport {
    bool found = false;
    double value = 0;
    double t_start = 0, t_end = 0;
    double slope_bound = 0;
};

// Longest window (in ln t) where the log-log slope stays under the threshold.
// Without a qualifying window, value/window/slope describe the flattest interval.
inline PlateauReport detect_plateau(const std::vector<double>& t, const std::vector<double>& y,
                                    PlateauOptions opt = {}) {
    PlateauReport rep;
    const std::size_t n = std::min(t.size(), y.size());
    if (n < 2) return rep;
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(y[i] > 0 && y[i + 1] > 0 && t[i] > 0)) {
            slope[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        slope[i] = std::abs((std::log(y[i + 1]) - std::log(y[i])) / (std::log(t[i + 1]) - std::log(t[i])));
    }
    std::size_t first = 0;
    if (opt.skip_leading) {
        while (first < slope.size() && slope[first] < opt.slope_threshold) ++first;
        if (first == slope.size()) first = 0;
    }
    double best_len = -1;
    for (std::size_t i = first; i < slope.size();) {
        if (!(slope[i] < opt.slope_threshold)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double bound = 0;
        while (j < slope.size() && slope[j] < opt.slope_threshold) bound = std::max(bound, slope[j++]);
        // intervals i..j-1 cover samples i..j
        const double len = std::log(t[j] / t[i]);
        if (t[j] >= opt.min_window_ratio * t[i] && len > best_len) {
            best_len = len;
            rep.found = true;
            rep.t_start = t[i];
            rep.t_end = t[j];
            rep.slope_bound = bound;
            double s = 0;
            for (std::size_t k = i; k <= j; ++k) s += y[k];
            rep.value = s / static_cast<double>(j - i + 1);
        }
        i = j;
    }
    if (!rep.found) {
        // flattest interval among interior local minima of the slope, so that a
        // point on the rising edge of the first decay is never reported
        std::size_t k = slope.size();
        for (std::size_t i = std::max<std::size_t>(first, 1); i + 1 < slope.size(); ++i)
            if (slope[i] <= slope[i - 1] && slope[i] <= slope[i + 1] && (k == slope.size() || slope[i] < slope[k]))
                k = i;
        if (k == slope.size())
            for (std::size_t i = first; i < slope.size(); ++i)
                if (k == slope.size() || slope[i] < slope[k]) k = i;
        if (k < slope.size() && std::isfinite(slope[k])) {
            rep.value = 0.5 * (y[k] + y[k + 1]);
            rep.t_start = t[k];
            rep.t_end = t[k + 1];
            rep.slope_bound = slope[k];
        }
    }
    return rep;
}

// First time y falls to (or below) level, linear interpolation between samples.
inline std::optional<double> first_crossing_below(const std::vector<double>& t,
                                                  const std::vector<double>& y, double level) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] > level) continue;
        if (i == 0) return t[0];
        const double f = (y[i - 1] - level) / (y[i - 1] - y[i]);
        return t[i - 1] + f * (t[i] - t[i - 1]);
    }
    return std::nullopt;
}

struct ZenoPoint {
    double gamma;
    PlateauReport plateau;
};

// One non-Hermitian loss run per rate; plateau of the density column.
inline std::vector<ZenoPoint> zeno_scan(const std::vector<double>& gammas, const BcsState& initial,
                                        const SystemParams& base, const Protocol& protocol,
                                        const IntegratorSettings& settings = {},
                                        PlateauOptions opt = {}, int workers = 1) {
    std::vector<ZenoPoint> out(gammas.size());
    const double W = base.grid->bandwidth;
    parallel_for(gammas.size(), workers, [&](std::size_t i) {
        const double G = gammas[i];
        ZenoPoint z{G, {}};
        if (G == 0) {
            // nothing to deplete
            const double t0 = protocol.sample_times.empty() ? initial.t : protocol.sample_times.front();
            z.plateau = {true, density(initial, *base.grid), t0 * W, protocol.t_max * W, 0};
        } else {
            SystemParams p = base;
            p.gamma = G;
            p.pump = 0;
            p.alpha_loss = 0;
            p.alpha_pump = 0;
            auto ts = run_protocol(initial, p, protocol, settings);
            z.plateau = detect_plateau(ts.t_w(), ts.column("n"), opt);
        }
        out[i] = z;
    });
    return out;
}

// Tracked modes are paired by energy (ε, -ε). The occupations below and above
// the Fermi level are averaged over a trailing window; returns the first time
// (t_w units) at which the below-average drops under the above-average.
inline std::optional<double> population_inversion_time(const TimeSeries& ts, double window_w = 10.0) {
    std::vector<std::size_t> below, above;
    const auto& e = ts.tracked_energies;
    for (std::size_t a = 0; a < e.size(); ++a) {
        if (!(e[a] < 0)) continue;
        for (std::size_t b = 0; b < e.size(); ++b)
            if (e[b] > 0 && std::abs(e[a] + e[b]) <= 1e-12 * std::max(1.0, std::abs(e[a]))) {
                below.push_back(a);
                above.push_back(b);
                break;
            }
    }
    if (below.empty()) throw ConfigError("population inversion needs a tracked particle-hole pair");
    const auto& t = ts.t_w();
    const std::size_t rows = ts.rows();
    auto occ = [&](std::size_t m, std::size_t row) {
        return 0.5 * (ts.column("sz_" + std::to_string(m))[row] + 1.0);
    };
    std::vector<double> lo(rows, 0), hi(rows, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = 0; k < below.size(); ++k) {
            lo[r] += occ(below[k], r);
            hi[r] += occ(above[k], r);
        }
    }
    // occupations that agree to this level count as equal (the Lindblad drive
    // relaxes both sides onto 1/2)
    const double tie = 1e-9;
    std::size_t start = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (t[start] < t[r] - window_w) ++start;
        if (t[r] - t.front() < window_w) continue;
        double slo = 0, shi = 0;
        for (std::size_t k = start; k <= r; ++k) slo += lo[k], shi += hi[k];
        const double cnt = static_cast<double>(r - start + 1) * static_cast<double>(below.size());
        if ((shi - slo) / cnt > tie) return t[r];
    }
    return std::nullopt;
}

}  // namespace hybcs
