#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"

namespace hybcs {

using cplx = std::complex<double>;

struct SystemParams {
    double u = 1.0;      // |U|
    double gamma = 0.0;  // loss rate
    double pump = 0.0;   // pump rate
    double alpha_loss = 1.0;
    double alpha_pump = 1.0;
    const BandGrid* grid = nullptr;

    void validate() const {
        if (!grid) throw ConfigError("params: grid not set");
        if (!(u >= 0) || !(gamma >= 0) || !(pump >= 0))
            throw ConfigError("params: u, gamma and pump must be non-negative");
        if (!(alpha_loss >= 0 && alpha_loss <= 1) || !(alpha_pump >= 0 && alpha_pump <= 1))
            throw ConfigError("params: alpha must lie in [0, 1]");
    }
};

// per-mode occupation n_k (one spin species) and pair amplitude Δ_k
struct BcsState {
    double t = 0.0;
    std::vector<double> n;
    std::vector<cplx> d;

    std::size_t size() const { return n.size(); }
};

struct StateDerivative {
    std::vector<double> dn;
    std::vector<cplx> dd;

    explicit StateDerivative(std::size_t m = 0) : dn(m, 0.0), dd(m, cplx(0.0)) {}
};

// Execution knobs for the per-mode loop; never changes results.
struct Exec {
    int threads = 1;
};

namespace detail {

// Neumaier-compensated, fixed order: bit-identical whatever the thread count.
inline double fixed_sum(const std::vector<double>& w, const std::vector<double>& x) {
    double s = 0, c = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double v = w[j] * x[j];
        double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    return s + c;
}

inline cplx fixed_sum(const std::vector<double>& w, const std::vector<cplx>& x) {
    double sr = 0, cr = 0, si = 0, ci = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double vr = w[j] * x[j].real(), vi = w[j] * x[j].imag();
        double tr = sr + vr, ti = si + vi;
        cr += std::abs(sr) >= std::abs(vr) ? (sr - tr) + vr : (vr - tr) + sr;
        ci += std::abs(si) >= std::abs(vi) ? (si - ti) + vi : (vi - ti) + si;
        sr = tr;
        si = ti;
    }
    return {sr + cr, si + ci};
}

struct Fields {
    double n;    // total density, both spins
    cplx delta;  // order parameter
    cplx phi;    // complex gap field
};

struct ModeRate {
    double dn;
    cplx dd;
};

inline ModeRate lindblad_mode(double eps, double nk, cplx dk, const Fields& f,
                              const SystemParams& p) {
    const double G = p.gamma, P = p.pump;
    const double fill = 1.0 - f.n / 2;
    ModeRate r;
    r.dn = -2.0 * std::imag(f.phi * std::conj(dk)) - G * f.n * nk + 2.0 * P * fill * (1.0 - nk);
    r.dd = cplx(0.0, 2.0 * eps) * dk - cplx(0.0, 1.0) * f.phi * (2.0 * nk - 1.0) - G * f.n * dk -
           2.0 * P * fill * dk;
    return r;
}

inline ModeRate hybrid_loss_mode(double nk, cplx dk, const Fields& f, const SystemParams& p) {
    const double G = p.gamma;
    const double re = std::real(f.delta * std::conj(dk));
    ModeRate r;
    r.dn = -G * f.n * (nk * nk - std::norm(dk)) - 4.0 * G * re * nk;
    r.dd = 2.0 * G * (-f.n * dk * nk + f.delta * (nk * nk) - std::conj(f.delta) * dk * dk);
    return r;
}

inline ModeRate hybrid_pump_mode(double nk, cplx dk, const Fields& f, const SystemParams& p) {
    const double P = p.pump;
    const double h = 1.0 - nk;
    const double re = std::real(f.delta * std::conj(dk));
    ModeRate r;
    r.dn = 2.0 * P * (1.0 - f.n / 2) * (h * h - std::norm(dk)) + 4.0 * P * re * h;
    r.dd = 2.0 * P * (2.0 - f.n) * dk * (nk - 1.0) +
           2.0 * P * (f.delta * (h * h) - std::conj(f.delta) * dk * dk);
    return r;
}

inline void check_shape(const BcsState& s, const SystemParams& p) {
    if (!p.grid) throw ConfigError("params: grid not set");
    if (s.n.size() != p.grid->n_modes() || s.d.size() != p.grid->n_modes())
        throw DimensionError("state size does not match grid");
}

template <class F>
void for_modes(std::size_t m, const Exec& ex, F&& f) {
    const long mm = static_cast<long>(m);
#if defined(_OPENMP)
    if (ex.threads > 1) {
#pragma omp parallel for schedule(static) num_threads(ex.threads)
        for (long j = 0; j < mm; ++j) f(static_cast<std::size_t>(j));
        return;
    }
#else
    (void)ex;
#endif
    for (long j = 0; j < mm; ++j) f(static_cast<std::size_t>(j));
}

inline void check_finite(const StateDerivative& r, double t) {
    for (std::size_t j = 0; j < r.dn.size(); ++j)
        if (!std::isfinite(r.dn[j]) || !std::isfinite(r.dd[j].real()) ||
            !std::isfinite(r.dd[j].imag()))
            throw BlowupError(j, t);
}

}  // namespace detail

inline cplx order_parameter(const BcsState& s, const BandGrid& g) {
    return detail::fixed_sum(g.weights, s.d);
}

inline double density(const BcsState& s, const BandGrid& g) {
    return 2.0 * detail::fixed_sum(g.weights, s.n);
}

inline cplx gap_field(const BcsState& s, const SystemParams& p) {
    return cplx(-p.u, p.gamma - p.pump) * order_parameter(s, *p.grid);
}

inline detail::Fields fields(const BcsState& s, const SystemParams& p) {
    detail::Fields f;
    f.n = density(s, *p.grid);
    f.delta = order_parameter(s, *p.grid);
    f.phi = cplx(-p.u, p.gamma - p.pump) * f.delta;
    return f;
}

inline StateDerivative rhs_lindblad(const BcsState& s, const SystemParams& p, Exec ex = {}) {
    detail::check_shape(s, p);
    const auto f = fields(s, p);
    StateDerivative r(s.size());
    detail::for_modes(s.size(), ex, [&](std::size_t j) {
        auto m = detail::lindblad_mode(p.grid->energies[j], s.n[j], s.d[j], f, p);
        r.dn[j] = m.dn;
        r.dd[j] = m.dd;
    });
    return r;
}

// Returned without the (alpha_loss - 1) prefactor.
inline StateDerivative rhs_hybrid_loss(const BcsState& s, const SystemParams& p, Exec ex = {}) {
    detail::check_shape(s, p);
    const auto f = fields(s, p);
    StateDerivative r(s.size());
    detail::for_modes(s.size(), ex, [&](std::size_t j) {
        auto m = detail::hybrid_loss_mode(s.n[j], s.d[j], f, p);
        r.dn[j] = m.dn;
        r.dd[j] = m.dd;
    });
    return r;
}

// Returned without the (alpha_pump - 1) prefactor.
inline StateDerivative rhs_hybrid_pump(const BcsState& s, const SystemParams& p, Exec ex = {}) {
    detail::check_shape(s, p);
    const auto f = fields(s, p);
    StateDerivative r(s.size());
    detail::for_modes(s.size(), ex, [&](std::size_t j) {
        auto m = detail::hybrid_pump_mode(s.n[j], s.d[j], f, p);
        r.dn[j] = m.dn;
        r.dd[j] = m.dd;
    });
    return r;
}

inline void rhs_total_into(const BcsState& s, const SystemParams& p, StateDerivative& r,
                           Exec ex = {}) {
    detail::check_shape(s, p);
    const auto f = fields(s, p);
    const double al = p.alpha_loss - 1.0, ap = p.alpha_pump - 1.0;
    r.dn.resize(s.size());
    r.dd.resize(s.size());
    detail::for_modes(s.size(), ex, [&](std::size_t j) {
        auto lin = detail::lindblad_mode(p.grid->energies[j], s.n[j], s.d[j], f, p);
        auto hl = detail::hybrid_loss_mode(s.n[j], s.d[j], f, p);
        auto hp = detail::hybrid_pump_mode(s.n[j], s.d[j], f, p);
        r.dn[j] = lin.dn + al * hl.dn + ap * hp.dn;
        r.dd[j] = lin.dd + al * hl.dd + ap * hp.dd;
    });
    detail::check_finite(r, s.t);
}

inline StateDerivative rhs_total(const BcsState& s, const SystemParams& p, Exec ex = {}) {
    StateDerivative r;
    rhs_total_into(s, p, r, ex);
    return r;
}

// n(j) -> 1 - n(j'), Δ(j) -> -conj Δ(j') with ε_j' = -ε_j
inline BcsState particle_hole_transform(const BcsState& s, const BandGrid& g) {
    if (!g.particle_hole_symmetric())
        throw ConfigError("particle-hole transform needs a particle-hole symmetric grid");
    if (s.size() != g.n_modes()) throw DimensionError("state size does not match grid");
    BcsState out;
    out.t = s.t;
    out.n.resize(s.size());
    out.d.resize(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) {
        const std::size_t q = g.partner[j];
        out.n[j] = 1.0 - s.n[q];
        out.d[j] = -std::conj(s.d[q]);
    }
    return out;
}

// same map applied to a derivative (linear part only)
inline StateDerivative particle_hole_transform(const StateDerivative& r, const BandGrid& g) {
    if (!g.particle_hole_symmetric())
        throw ConfigError("particle-hole transform needs a particle-hole symmetric grid");
    StateDerivative out(r.dn.size());
    for (std::size_t j = 0; j < r.dn.size(); ++j) {
        const std::size_t q = g.partner[j];
        out.dn[j] = -r.dn[q];
        out.dd[j] = -std::conj(r.dd[q]);
    }
    return out;
}

inline double zeta(double nk, cplx dk) {
    const double z = 2.0 * nk - 1.0;
    return 4.0 * std::norm(dk) + z * z;
}

// dζ_k/dt by chain rule from a derivative
inline double zeta_rate(double nk, cplx dk, double dn, cplx dd) {
    return 8.0 * std::real(std::conj(dk) * dd) + 4.0 * (2.0 * nk - 1.0) * dn;
}

// Closed-form pseudospin-length law for pure loss (P = 0).
inline double zeta_rate_loss_law(double nk, cplx dk, const BcsState& s, const SystemParams& p) {
    const double n = density(s, *p.grid);
    const cplx D = order_parameter(s, *p.grid);
    const double a = p.alpha_loss, G = p.gamma;
    const double C = G * (2.0 * n + (a - 1.0) * (4.0 * std::real(D * std::conj(dk)) + n * (2.0 * nk + 1.0)));
    return -C * (zeta(nk, dk) - 1.0) - 4.0 * a * G * n * nk;
}

}  // namespace hybcs
