#pragma once

#include <cmath>

#include "dynamics.hpp"
#include "errors.hpp"
#include "lattice.hpp"

namespace hybcs {

struct GapSolution {
    double gap = 0;              // Δ̄ = |U| Δ
    double order_parameter = 0;  // Δ
    double residual = 0;         // 1 - |U| Σ w / (2E)
};

namespace detail {

inline double gap_equation(const BandGrid& g, double u, double gap) {
    double s = 0;
    for (std::size_t j = 0; j < g.n_modes(); ++j)
        s += g.weights[j] / (2.0 * std::sqrt(g.energies[j] * g.energies[j] + gap * gap));
    return 1.0 - u * s;
}

}  // namespace detail

// Continuum flat band: Δ̄ = W / (2 sinh(W/|U|)).
inline double gap_closed_form(double bandwidth, double u) {
    return bandwidth / (2.0 * std::sinh(bandwidth / u));
}

inline GapSolution solve_gap(const BandGrid& g, double u) {
    if (!(u > 0)) throw ConfigError("interaction: |U| must be positive");
    // the residual increases with the gap; at gap -> 0 it has to be negative
    if (detail::gap_equation(g, u, 0.0) >= 0)
        throw NoSolutionError("coupling below the discrete-grid pairing threshold");
    double lo = 0, hi = g.bandwidth;
    while (detail::gap_equation(g, u, hi) < 0) hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (detail::gap_equation(g, u, mid) < 0 ? lo : hi) = mid;
        if (std::abs(detail::gap_equation(g, u, mid)) < 1e-15) {
            lo = hi = mid;
            break;
        }
    }
    GapSolution s;
    s.gap = 0.5 * (lo + hi);
    s.order_parameter = s.gap / u;
    s.residual = detail::gap_equation(g, u, s.gap);
    return s;
}

inline BcsState build_ground_state(const BandGrid& g, const GapSolution& gap) {
    BcsState s;
    s.t = 0;
    s.n.resize(g.n_modes());
    s.d.resize(g.n_modes());
    for (std::size_t j = 0; j < g.n_modes(); ++j) {
        const double e = g.energies[j];
        const double E = std::sqrt(e * e + gap.gap * gap.gap);
        s.n[j] = 0.5 * (1.0 - e / E);
        s.d[j] = cplx(gap.gap / (2.0 * E), 0.0);
    }
    return s;
}

}  // namespace hybcs
