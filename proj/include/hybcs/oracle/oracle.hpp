#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../dynamics.hpp"
#include "../equilibrium.hpp"
#include "../lattice.hpp"
#include "../parallel.hpp"
#include "fock.hpp"

namespace hybcs::oracle {

// d<O>/dt for the normalized hybrid dynamics, term by term:
//   -i<[O,H]> + (α/2) Σ (<L†[O,L]> - <[O,L†]L>) + ((α-1)/2) Σ (<{L†L,O}> - 2<L†L><O>)
// One α per jump operator.
inline cplx exact_hybrid_rhs(const FockOperator& rho, const FockOperator& H,
                             const std::vector<FockOperator>& jumps, const std::vector<double>& alphas,
                             const FockOperator& O) {
    const auto d = rho.rows();
    if (rho.cols() != d || H.rows() != d || H.cols() != d || O.rows() != d || O.cols() != d)
        throw DimensionError("exact_hybrid_rhs: operator dimensions disagree");
    if (alphas.size() != jumps.size()) throw DimensionError("exact_hybrid_rhs: one alpha per jump");
    const cplx tr = rho.trace();
    auto ev = [&](const FockOperator& X) { return expect(rho, X) / tr; };
    cplx r = cplx(0, -1) * ev(O * H - H * O);
    const cplx o = ev(O);
    for (std::size_t mu = 0; mu < jumps.size(); ++mu) {
        const FockOperator& L = jumps[mu];
        if (L.rows() != d || L.cols() != d) throw DimensionError("exact_hybrid_rhs: jump dimension");
        const FockOperator Ld = L.adjoint();
        const FockOperator LdL = Ld * L;
        const double a = alphas[mu];
        r += 0.5 * a * (ev(Ld * (O * L - L * O)) - ev((O * Ld - Ld * O) * L));
        r += 0.5 * (a - 1.0) * (ev(LdL * O + O * LdL) - 2.0 * ev(LdL) * o);
    }
    return r;
}

inline cplx exact_hybrid_rhs(const FockOperator& rho, const FockOperator& H,
                             const std::vector<FockOperator>& jumps, double alpha, const FockOperator& O) {
    return exact_hybrid_rhs(rho, H, jumps, std::vector<double>(jumps.size(), alpha), O);
}

// Same quantity through the Schrödinger picture, d<O>/dt = Tr(O X) with X
// precomputed once per (ρ, H, jumps, α); used when many observables share a state.
class ExactEvaluator {
public:
    ExactEvaluator(const FockOperator& rho, const FockOperator& H, const std::vector<FockOperator>& jumps,
                   const std::vector<double>& alphas) {
        const cplx tr = rho.trace();
        const FockOperator r = rho / tr;
        FockOperator gen = cplx(0, -1) * (H * r - r * H);
        for (std::size_t mu = 0; mu < jumps.size(); ++mu) {
            const FockOperator& L = jumps[mu];
            const FockOperator LdL = L.adjoint() * L;
            gen += alphas[mu] * L * r * L.adjoint() - 0.5 * (LdL * r + r * LdL);
        }
        x_ = gen - r * gen.trace();
    }
    cplx operator()(const FockOperator& O) const { return expect(x_, O); }

private:
    FockOperator x_;
};

// BCS mean-field setup on a ring: ε_q from the grid, pairing field from the
// instantaneous order parameter, on-site pair loss and pump jumps.
struct BcsCluster {
    FockSpace fs;
    GaussianFockState state;
    FockOperator H;
    std::vector<FockOperator> loss, pump;

    BcsCluster(int sites, const BcsState& s, const SystemParams& p)
        : fs(sites), state(GaussianFockState::bcs(fs, s)) {
        const BandGrid& g = *p.grid;
        if (static_cast<int>(g.n_modes()) != sites) throw DimensionError("oracle grid must have one mode per site");
        const cplx D = order_parameter(s, g);
        H = FockOperator::Zero(fs.dim(), fs.dim());
        for (int q = 0; q < sites; ++q)
            for (int sp = 0; sp < 2; ++sp) {
                const FockOperator c = fs.ck(q, sp);
                H += g.energies[q] * c.adjoint() * c;
            }
        for (int i = 0; i < sites; ++i) {
            const FockOperator pair = fs.c(i, 1) * fs.c(i, 0);  // c_{i↓} c_{i↑}
            FockOperator term = -p.u * D * pair;
            H += term + FockOperator(term.adjoint());
            loss.push_back(std::sqrt(2.0 * p.gamma) * pair);
            pump.push_back(std::sqrt(2.0 * p.pump) * FockOperator(pair.adjoint()));
        }
    }
};

// Grid for the L-site ring, ε_q = -2t cos(2π q / L) with W = 4t.
inline BandGrid oracle_grid(int sites, double bandwidth = 1.0) {
    if (sites == 2) return build_flat_band(bandwidth, 2);
    std::vector<double> e(sites), w(sites, 1.0 / sites);
    for (int q = 0; q < sites; ++q) e[q] = -bandwidth / 2 * std::cos(2.0 * std::numbers::pi * q / sites);
    return make_grid(bandwidth, e, w);
}

enum class RhsTerm { unitary, lindblad_loss, lindblad_pump, hybrid_loss, hybrid_pump };

inline const char* term_name(RhsTerm t) {
    switch (t) {
        case RhsTerm::unitary: return "unitary";
        case RhsTerm::lindblad_loss: return "lindblad_loss";
        case RhsTerm::lindblad_pump: return "lindblad_pump";
        case RhsTerm::hybrid_loss: return "hybrid_loss";
        case RhsTerm::hybrid_pump: return "hybrid_pump";
    }
    return "?";
}

inline std::optional<RhsTerm> parse_term(const std::string& s) {
    for (auto t : {RhsTerm::unitary, RhsTerm::lindblad_loss, RhsTerm::lindblad_pump, RhsTerm::hybrid_loss,
                   RhsTerm::hybrid_pump})
        if (s == term_name(t)) return t;
    return std::nullopt;
}

struct EomResidual {
    double max_residual = 0;
    std::string term = "total";  // where the worst residual sits
    std::string op;
    std::size_t mode = 0;
    double alpha = 0;

    void offer(double r, const std::string& t, const std::string& o, std::size_t m, double a) {
        if (r > max_residual) {
            max_residual = r;
            term = t;
            op = o;
            mode = m;
            alpha = a;
        }
    }
    void merge(const EomResidual& o) {
        if (o.max_residual > max_residual) *this = o;
    }
};

// Compares every term of the variational equations with the exact Fock-space
// derivative. `fault` flips the sign of one model term (negative control).
inline EomResidual check_eom_equivalence(int sites, const BcsState& s, const SystemParams& p,
                                         std::optional<RhsTerm> fault = std::nullopt) {
    p.validate();
    BcsCluster cl(sites, s, p);
    const auto& rho = cl.state.rho;
    std::vector<FockOperator> both = cl.loss;
    both.insert(both.end(), cl.pump.begin(), cl.pump.end());
    std::vector<double> alphas(cl.loss.size(), p.alpha_loss);
    alphas.insert(alphas.end(), cl.pump.size(), p.alpha_pump);
    const std::vector<double> ones(cl.loss.size(), 1.0), zeros(cl.loss.size(), 0.0);

    ExactEvaluator e0(rho, cl.H, {}, {});
    ExactEvaluator el1(rho, cl.H, cl.loss, ones), el0(rho, cl.H, cl.loss, zeros);
    ExactEvaluator ep1(rho, cl.H, cl.pump, ones), ep0(rho, cl.H, cl.pump, zeros);
    ExactEvaluator etot(rho, cl.H, both, alphas);

    SystemParams pu = p, pl = p, pp = p;
    pu.gamma = pu.pump = 0;
    pl.pump = 0;
    pp.gamma = 0;
    const auto mu = rhs_lindblad(s, pu);
    const auto ml_full = rhs_lindblad(s, pl), mp_full = rhs_lindblad(s, pp);
    std::array<StateDerivative, 5> model{mu, StateDerivative(s.size()), StateDerivative(s.size()),
                                         rhs_hybrid_loss(s, p), rhs_hybrid_pump(s, p)};
    for (std::size_t j = 0; j < s.size(); ++j) {
        model[1].dn[j] = ml_full.dn[j] - mu.dn[j];
        model[1].dd[j] = ml_full.dd[j] - mu.dd[j];
        model[2].dn[j] = mp_full.dn[j] - mu.dn[j];
        model[2].dd[j] = mp_full.dd[j] - mu.dd[j];
    }
    auto total = rhs_total(s, p);
    if (fault) {
        const int f = static_cast<int>(*fault);
        const double coef = f == 3 ? p.alpha_loss - 1.0 : f == 4 ? p.alpha_pump - 1.0 : 1.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            total.dn[j] -= 2.0 * coef * model[f].dn[j];
            total.dd[j] -= 2.0 * coef * model[f].dd[j];
            model[f].dn[j] = -model[f].dn[j];
            model[f].dd[j] = -model[f].dd[j];
        }
    }

    EomResidual res, tot;
    const double a = p.alpha_loss;
    for (int q = 0; q < sites; ++q) {
        const FockOperator cu = cl.fs.ck(q, 0), cdn = cl.fs.ck(q, 1);
        const FockOperator cmd = cl.fs.ck(cl.fs.minus_q(q), 1);
        struct Obs {
            std::string name;
            FockOperator op;
            bool pair;
        };
        const std::vector<Obs> obs = {{"n_up", FockOperator(cu.adjoint() * cu), false},
                                      {"n_down", FockOperator(cdn.adjoint() * cdn), false},
                                      {"pair", FockOperator(cu.adjoint() * cmd.adjoint()), true}};
        for (const auto& o : obs) {
            auto pick = [&](const StateDerivative& r) { return o.pair ? r.dd[q] : cplx(r.dn[q], 0.0); };
            const cplx x0 = e0(o.op), xl1 = el1(o.op), xl0 = el0(o.op), xp1 = ep1(o.op), xp0 = ep0(o.op);
            const std::array<cplx, 5> exact{x0, xl1 - x0, xp1 - x0, xl1 - xl0, xp1 - xp0};
            for (int t = 0; t < 5; ++t)
                res.offer(std::abs(exact[t] - pick(model[t])), term_name(static_cast<RhsTerm>(t)), o.name,
                          q, a);
            tot.offer(std::abs(etot(o.op) - pick(total)), "total", o.name, q, a);
        }
    }
    // name the offending term when one is off; "total" only if every term agrees
    // but the weighted sum does not
    if (res.max_residual > 1e-10) {
        res.max_residual = std::max(res.max_residual, tot.max_residual);
        return res;
    }
    res.merge(tot);
    return res;
}

// Random state with per-mode pseudospin length r ≤ 1, symmetric under k -> -k.
inline BcsState random_bcs_state(int sites, std::mt19937_64& rng, bool pure = false) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss;
    BcsState s;
    s.n.resize(sites);
    s.d.resize(sites);
    for (int q = 0; q < sites; ++q) {
        const int mq = (sites - q) % sites;
        if (mq < q) {
            s.n[q] = s.n[mq];
            s.d[q] = s.d[mq];
            continue;
        }
        double v[3] = {gauss(rng), gauss(rng), gauss(rng)};
        const double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        const double r = pure ? 1.0 : uni(rng);
        s.n[q] = 0.5 * (1.0 + r * v[2] / nv);
        s.d[q] = 0.5 * r * cplx(v[0], v[1]) / nv;
    }
    return s;
}

// ---- Gaussian Hartree-Fock trace identity ----

struct HfCouplings {
    Eigen::MatrixXcd t;      // hopping, Hermitian
    std::vector<cplx> U;     // U_abcd, flattened a-major
    Eigen::MatrixXd kappa;   // pair-loss couplings κ_ab ≥ 0
};

struct HfCase {
    HfCouplings couplings;
    Eigen::MatrixXcd G;  // <c_a† c_b>
    FockOperator aux;
};

enum class HfVariant { random, free, single_symmetric_kappa };
enum class AuxKind { one_body, generic };

inline HfCase random_hf_case(const FockSpace& fs, std::uint64_t seed, HfVariant v = HfVariant::random,
                             AuxKind aux = AuxKind::one_body) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int M = fs.modes();
    auto rc = [&] { return cplx(g(rng), g(rng)); };
    HfCase c;
    Eigen::MatrixXcd A(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) A(i, j) = rc();
    c.couplings.t = A + A.adjoint();
    if (v == HfVariant::free) c.couplings.t.setZero();

    auto& U = c.couplings.U;
    U.assign(static_cast<std::size_t>(M * M * M * M), 0.0);
    auto idx = [M](int a, int b, int cc, int d) { return ((a * M + b) * M + cc) * M + d; };
    if (v != HfVariant::free) {
        std::vector<cplx> raw(U.size());
        for (auto& x : raw) x = rc();
        // U_abcd = U_badc and U_abcd = conj(U_dcba)
        std::vector<cplx> sym(U.size());
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b)
                for (int cc = 0; cc < M; ++cc)
                    for (int d = 0; d < M; ++d)
                        sym[idx(a, b, cc, d)] = 0.5 * (raw[idx(a, b, cc, d)] + raw[idx(b, a, d, cc)]);
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b)
                for (int cc = 0; cc < M; ++cc)
                    for (int d = 0; d < M; ++d)
                        U[idx(a, b, cc, d)] = 0.5 * (sym[idx(a, b, cc, d)] + std::conj(sym[idx(d, cc, b, a)]));
    }

    c.couplings.kappa = Eigen::MatrixXd::Zero(M, M);
    if (v == HfVariant::random) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) c.couplings.kappa(i, j) = uni(rng);
    } else if (v == HfVariant::single_symmetric_kappa) {
        c.couplings.kappa(0, 1) = c.couplings.kappa(1, 0) = 0.5 + uni(rng);
    }

    // correlation matrix with spectrum inside (0, 1)
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) A(i, j) = rc();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A + A.adjoint());
    Eigen::VectorXd lam(M);
    for (int i = 0; i < M; ++i) lam(i) = 0.05 + 0.9 * uni(rng);
    c.G = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();

    if (aux == AuxKind::one_body) {
        c.aux = rc() * fs.identity();
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b) c.aux += rc() * fs.cdag(a) * fs.c(b);
    } else {
        c.aux = FockOperator(fs.dim(), fs.dim());
        for (int i = 0; i < fs.dim(); ++i)
            for (int j = 0; j < fs.dim(); ++j) c.aux(i, j) = rc();
    }
    return c;
}

// |Tr(ρ_aux L_1[ρ0]) - Tr(ρ_aux L_HF[ρ0])| for a normal Gaussian ρ0.
inline double check_hf_trace_identity(const FockSpace& fs, const HfCouplings& k, const GaussianFockState& rho0,
                                      const FockOperator& aux) {
    const int M = fs.modes();
    const int d = fs.dim();
    if (k.t.rows() != M || k.kappa.rows() != M || static_cast<int>(k.U.size()) != M * M * M * M ||
        aux.rows() != d)
        throw DimensionError("hf trace identity: coupling dimensions disagree with the Fock space");
    auto U = [&](int a, int b, int c, int e) { return k.U[((a * M + b) * M + c) * M + e]; };
    const FockOperator& rho = rho0.rho;

    std::vector<FockOperator> cd(M);
    for (int a = 0; a < M; ++a) cd[a] = fs.cdag(a);

    // exact generator
    FockOperator H = FockOperator::Zero(d, d);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) H += k.t(a, b) * cd[a] * fs.c(b);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const FockOperator cdcd = cd[a] * cd[b];
            for (int c = 0; c < M; ++c)
                for (int e = 0; e < M; ++e) {
                    const cplx u = U(a, b, c, e);
                    if (u != cplx(0)) H += 0.5 * u * cdcd * fs.c(c) * fs.c(e);
                }
        }
    Eigen::MatrixXd s = k.kappa.cwiseSqrt();
    FockOperator L = FockOperator::Zero(d, d);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
            if (s(a, b) != 0) L += s(a, b) * fs.c(a) * fs.c(b);
    const FockOperator LdL = L.adjoint() * L;
    const FockOperator L1 = cplx(0, -1) * (H * rho - rho * H) + L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);

    // mean-field generator
    Eigen::MatrixXcd G(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) G(a, b) = expect(rho, cd[a] * fs.c(b));
    FockOperator Hhf = FockOperator::Zero(d, d);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) Hhf += k.t(a, b) * cd[a] * fs.c(b);
    for (int b = 0; b < M; ++b)
        for (int c = 0; c < M; ++c) {
            cplx h = 0;
            for (int a = 0; a < M; ++a)
                for (int e = 0; e < M; ++e) h += (U(a, b, c, e) - U(a, b, e, c)) * G(a, e);
            Hhf += h * cd[b] * fs.c(c);
        }
    // only the antisymmetric part of the amplitude matrix enters L
    const Eigen::MatrixXd sa = 0.5 * (s - s.transpose());
    FockOperator Lhf = cplx(0, -1) * (Hhf * rho - rho * Hhf);
    for (int b = 0; b < M; ++b)
        for (int c = 0; c < M; ++c) {
            cplx kbc = 0;
            for (int a = 0; a < M; ++a)
                for (int e = 0; e < M; ++e) {
                    const double gbar = sa(b, a) * sa(c, e) - sa(b, a) * sa(e, c);
                    kbc += 2.0 * gbar * G(a, e);
                }
            if (kbc == cplx(0)) continue;
            const FockOperator bc = cd[b] * fs.c(c);
            Lhf += kbc * (fs.c(c) * rho * cd[b] - 0.5 * (bc * rho + rho * bc));
        }
    return std::abs(expect(L1, aux) - expect(Lhf, aux));
}

// ---- normalized vs norm-conserving generator ----

struct NormCheck {
    std::vector<double> dts;
    std::vector<double> residuals;
    double slope = 0;            // least-squares log2 slope over the halving ladder
    double generator_trace = 0;  // |Tr L̄[ρ]|
};

inline NormCheck check_norm_conserving_equivalence(const FockOperator& rho_in, const FockOperator& H,
                                                   const std::vector<FockOperator>& jumps, double alpha,
                                                   const FockOperator& O, double dt, int levels = 4) {
    const FockOperator rho = rho_in / rho_in.trace();
    FockOperator gen = cplx(0, -1) * (H * rho - rho * H);
    cplx loss_rate = 0;
    for (const auto& L : jumps) {
        const FockOperator LdL = L.adjoint() * L;
        gen += alpha * L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
        loss_rate += expect(rho, LdL);
    }
    const FockOperator bar = gen - rho * ((alpha - 1.0) * loss_rate);
    NormCheck nc;
    nc.generator_trace = std::abs(bar.trace());
    for (int l = 0; l < levels; ++l) {
        const double h = dt / std::pow(2.0, l);
        const FockOperator r1 = rho + h * gen;
        const FockOperator r2 = rho + h * bar;
        const cplx a = expect(r1, O) / r1.trace();
        const cplx b = expect(r2, O);
        nc.dts.push_back(h);
        nc.residuals.push_back(std::abs(a - b));
    }
    double mx = 0, my = 0;
    for (int l = 0; l < levels; ++l) mx += std::log2(nc.dts[l]), my += std::log2(nc.residuals[l]);
    mx /= levels;
    my /= levels;
    double sxx = 0, sxy = 0;
    for (int l = 0; l < levels; ++l) {
        const double x = std::log2(nc.dts[l]) - mx;
        sxx += x * x;
        sxy += x * (std::log2(nc.residuals[l]) - my);
    }
    nc.slope = sxy / sxx;
    return nc;
}

// ---- no-click propagator ----

inline FockOperator nh_hamiltonian(const FockOperator& H, const std::vector<FockOperator>& jumps) {
    FockOperator h = H;
    for (const auto& L : jumps) h -= cplx(0, 0.5) * L.adjoint() * L;
    return h;
}

// d/dt Tr(e^{-iH_nH t} ρ e^{iH_nH† t} O)/Tr(...) at t = 0, fourth-order central differences
inline cplx nh_finite_difference_rate(const FockOperator& rho, const FockOperator& H,
                                      const std::vector<FockOperator>& jumps, const FockOperator& O,
                                      double h = 1e-3) {
    const FockOperator hnh = nh_hamiltonian(H, jumps);
    auto f = [&](double tau) {
        const FockOperator U = (cplx(0, -tau) * hnh).exp();
        const FockOperator r = U * rho * U.adjoint();
        return expect(r, O) / r.trace();
    };
    return (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h);
}

// ---- full suite ----

struct CheckResult {
    std::string name;
    double value;
    double threshold;
    bool passed;
    std::string detail;
};

struct OracleOptions {
    int seeds = 20;
    int sites = 2;
    std::optional<RhsTerm> fault;
    std::uint64_t base_seed = 20240601;
    int workers = 1;
};

struct OracleReport {
    std::vector<CheckResult> checks;
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
    }
};

inline OracleReport run_oracle(const OracleOptions& opt) {
    if (opt.sites != 2 && opt.sites != 3) throw ConfigError("oracle: --sites must be 2 or 3");
    if (opt.seeds < 1) throw ConfigError("oracle: --seeds must be positive");
    OracleReport rep;
    auto add = [&](std::string name, double v, double thr, std::string detail = {}, bool lower_is_ok = true) {
        const bool ok = lower_is_ok ? v <= thr : v >= thr;
        rep.checks.push_back({std::move(name), v, thr, ok && std::isfinite(v), std::move(detail)});
    };

    const int L = opt.sites;
    const FockSpace fs(L);
    add("fock_car", fs.car_residual(), 1e-14);

    const BandGrid grid = oracle_grid(L, 1.0);

    // Gaussian state invariants on a random BCS state
    {
        std::mt19937_64 rng(opt.base_seed);
        auto s = random_bcs_state(L, rng);
        auto gs = GaussianFockState::bcs(fs, s);
        add("gaussian_trace", gs.trace_residual(), 1e-12);
        add("gaussian_psd", -gs.min_eigenvalue(), 1e-12);
        add("gaussian_two_point", gs.two_point_residual(), 1e-12);
        add("gaussian_wick", gs.wick_residual(rng), 1e-10);
    }

    // ground state, no dissipation
    if (L == 2) {
        SystemParams p{1.0, 0.0, 0.0, 1.0, 1.0, &grid};
        auto s = build_ground_state(grid, solve_gap(grid, p.u));
        add("eom_ground_state", check_eom_equivalence(L, s, p, opt.fault).max_residual, 1e-12);
    }

    // random states x (α, Γ, P) grid
    {
        const std::vector<double> vals = {0.0, 0.5, 1.0};
        std::vector<EomResidual> per(opt.seeds);
        parallel_for(static_cast<std::size_t>(opt.seeds), opt.workers, [&](std::size_t i) {
            std::mt19937_64 rng(opt.base_seed + 1000 + i);
            auto s = random_bcs_state(L, rng);
            std::uniform_real_distribution<double> uu(0.3, 1.5);
            const double u = uu(rng);
            for (double a : vals)
                for (double G : vals)
                    for (double P : vals) {
                        SystemParams p{u, G, P, a, a, &grid};
                        per[i].merge(check_eom_equivalence(L, s, p, opt.fault));
                    }
        });
        EomResidual worst;
        for (auto& r : per) worst.merge(r);
        std::ostringstream os;
        os << "worst term " << worst.term << ", operator " << worst.op << ", mode " << worst.mode << ", alpha "
           << worst.alpha;
        add("eom_equivalence", worst.max_residual, 1e-10, os.str());
    }

    // Hartree-Fock trace identity (two sites at most)
    {
        const FockSpace hs(std::min(L, 2));
        double worst = 0;
        std::uint64_t worst_seed = 0;
        for (int i = 0; i < 10; ++i) {
            const std::uint64_t seed = opt.base_seed + 5000 + i;
            auto c = random_hf_case(hs, seed);
            auto rho0 = GaussianFockState::normal(hs, c.G);
            const double r = check_hf_trace_identity(hs, c.couplings, rho0, c.aux);
            if (r >= worst) worst = r, worst_seed = seed;
        }
        add("hf_trace_identity", worst, 1e-12, "seed " + std::to_string(worst_seed));
        auto c = random_hf_case(hs, opt.base_seed + 6000, HfVariant::single_symmetric_kappa);
        add("hf_trace_symmetric_kappa",
            check_hf_trace_identity(hs, c.couplings, GaussianFockState::normal(hs, c.G), c.aux), 1e-12);
    }

    // normalized vs norm-conserving generator, α = 0 and α = 1
    {
        const FockSpace ns(2);
        std::mt19937_64 rng(opt.base_seed + 7000);
        std::normal_distribution<double> g;
        auto rmat = [&] {
            FockOperator m(ns.dim(), ns.dim());
            for (int i = 0; i < ns.dim(); ++i)
                for (int j = 0; j < ns.dim(); ++j) m(i, j) = cplx(g(rng), g(rng));
            return m;
        };
        FockOperator A = rmat();
        FockOperator rho = A * A.adjoint();
        rho /= rho.trace();
        FockOperator H = rmat();
        H = 0.5 * (H + H.adjoint());
        FockOperator O = rmat();
        O = 0.5 * (O + O.adjoint());
        std::vector<FockOperator> jumps;
        for (int i = 0; i < 2; ++i) {
            const FockOperator pair = ns.c(i, 1) * ns.c(i, 0);
            jumps.push_back(std::sqrt(2.0 * 0.3) * pair);
            jumps.push_back(std::sqrt(2.0 * 0.2) * FockOperator(pair.adjoint()));
        }
        auto n0 = check_norm_conserving_equivalence(rho, H, jumps, 0.0, O, 1e-3);
        add("norm_conserving_slope", std::abs(n0.slope - 2.0), 0.1, "slope " + std::to_string(n0.slope));
        add("norm_conserving_trace", n0.generator_trace, 1e-13);
        auto n1 = check_norm_conserving_equivalence(rho, H, jumps, 1.0, O, 1e-3);
        add("norm_conserving_alpha1", *std::max_element(n1.residuals.begin(), n1.residuals.end()), 1e-14);
    }

    // α = 0 triangle: exact EOM, no-click propagator, variational RHS
    {
        std::mt19937_64 rng(opt.base_seed + 8000);
        auto s = random_bcs_state(L, rng);
        SystemParams p{0.8, 0.3, 0.2, 0.0, 0.0, &grid};
        BcsCluster cl(L, s, p);
        std::vector<FockOperator> both = cl.loss;
        both.insert(both.end(), cl.pump.begin(), cl.pump.end());
        const auto model = rhs_total(s, p);
        double worst = 0;
        for (int q = 0; q < L; ++q) {
            const FockOperator cu = cl.fs.ck(q, 0);
            const FockOperator pair = cu.adjoint() * cl.fs.ck(cl.fs.minus_q(q), 1).adjoint();
            const FockOperator num = cu.adjoint() * cu;
            for (int k = 0; k < 2; ++k) {
                const FockOperator& O = k ? pair : num;
                const cplx m = k ? model.dd[q] : cplx(model.dn[q], 0);
                const cplx ex = exact_hybrid_rhs(cl.state.rho, cl.H, both, 0.0, O);
                const cplx fd = nh_finite_difference_rate(cl.state.rho, cl.H, both, O);
                worst = std::max({worst, std::abs(ex - fd), std::abs(ex - m), std::abs(fd - m)});
            }
        }
        add("nh_triangle", worst, 1e-8);
    }
    return rep;
}

}  // namespace hybcs::oracle
