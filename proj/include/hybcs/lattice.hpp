#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hybcs {

// Discretized flat band. Energies are absolute (same units as bandwidth),
// weights are dimensionless and sum to one.
struct BandGrid {
    double bandwidth = 1.0;
    std::vector<double> energies;
    std::vector<double> weights;
    // partner[j] is the mode with energy -energies[j]; empty when the grid
    // has no particle-hole pairing
    std::vector<std::size_t> partner;

    std::size_t n_modes() const { return energies.size(); }
    bool particle_hole_symmetric() const { return !partner.empty(); }

    std::size_t nearest_mode(double energy) const {
        std::size_t best = 0;
        for (std::size_t j = 1; j < energies.size(); ++j)
            if (std::abs(energies[j] - energy) < std::abs(energies[best] - energy)) best = j;
        return best;
    }

    // FNV-1a over the raw bytes; identifies a grid in run metadata
    std::uint64_t checksum() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&](double x) {
            unsigned char b[sizeof(double)];
            std::memcpy(b, &x, sizeof(double));
            for (unsigned char c : b) {
                h ^= c;
                h *= 1099511628211ull;
            }
        };
        mix(bandwidth);
        for (double e : energies) mix(e);
        for (double w : weights) mix(w);
        return h;
    }
};

namespace detail {

inline std::vector<std::size_t> find_partners(const std::vector<double>& e,
                                              const std::vector<double>& w, double tol) {
    const std::size_t n = e.size();
    std::vector<std::size_t> p(n);
    for (std::size_t j = 0; j < n; ++j) {
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(e[i] + e[j]) <= tol && std::abs(w[i] - w[j]) <= tol) {
                p[j] = i;
                found = true;
                break;
            }
        }
        if (!found) return {};
    }
    return p;
}

}  // namespace detail

// Validates an arbitrary grid. PH symmetry is detected, not required.
inline BandGrid make_grid(double bandwidth, std::vector<double> energies,
                          std::vector<double> weights) {
    if (!(bandwidth > 0) || !std::isfinite(bandwidth))
        throw ConfigError("band.width: must be positive");
    if (energies.empty() || energies.size() != weights.size())
        throw ConfigError("band: energies and weights must be non-empty and of equal length");
    double sum = 0;
    for (std::size_t j = 0; j < energies.size(); ++j) {
        if (!(weights[j] > 0)) throw ConfigError("band: weights must be positive");
        if (std::abs(energies[j]) > bandwidth / 2 * (1 + 1e-15))
            throw ConfigError("band: energies must lie in [-W/2, W/2]");
        sum += weights[j];
    }
    if (std::abs(sum - 1.0) > 1e-14) throw ConfigError("band: weights must sum to one");
    BandGrid g;
    g.bandwidth = bandwidth;
    g.partner = detail::find_partners(energies, weights, 1e-14 * bandwidth);
    g.energies = std::move(energies);
    g.weights = std::move(weights);
    return g;
}

// Midpoint rule on [-W/2, W/2]; even n keeps the Fermi level between modes.
inline BandGrid build_flat_band(double bandwidth, std::size_t n_modes) {
    if (!(bandwidth > 0) || !std::isfinite(bandwidth))
        throw ConfigError("band.width: must be positive");
    if (n_modes < 2 || n_modes % 2 != 0)
        throw ConfigError("band.n_modes: must be even and at least 2");
    BandGrid g;
    g.bandwidth = bandwidth;
    g.energies.resize(n_modes);
    g.weights.assign(n_modes, 1.0 / static_cast<double>(n_modes));
    const double h = bandwidth / static_cast<double>(n_modes);
    for (std::size_t j = 0; j < n_modes / 2; ++j) {
        // build the lower half and mirror it so the symmetry is exact in floating point
        double e = -bandwidth / 2 + (static_cast<double>(j) + 0.5) * h;
        g.energies[j] = e;
        g.energies[n_modes - 1 - j] = -e;
    }
    g.partner.resize(n_modes);
    for (std::size_t j = 0; j < n_modes; ++j) g.partner[j] = n_modes - 1 - j;
    return g;
}

}  // namespace hybcs
