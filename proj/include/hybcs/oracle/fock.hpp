#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "../dynamics.hpp"
#include "../errors.hpp"

namespace hybcs::oracle {

using cplx = std::complex<double>;
using FockOperator = Eigen::MatrixXcd;

// Spin-1/2 fermions on a ring of `sites` sites. Mode index = 2*site + spin
// (spin 0 = up, 1 = down); basis bit m is the occupation of mode m and the
// Jordan-Wigner string runs over all lower modes.
class FockSpace {
public:
    explicit FockSpace(int sites) : sites_(sites) {
        if (sites < 1 || sites > 3) throw ConfigError("oracle: sites must be between 1 and 3");
        modes_ = 2 * sites;
        dim_ = 1 << modes_;
        c_.reserve(modes_);
        for (int m = 0; m < modes_; ++m) {
            FockOperator op = FockOperator::Zero(dim_, dim_);
            for (int b = 0; b < dim_; ++b) {
                if (!(b >> m & 1)) continue;
                const int parity = __builtin_popcount(static_cast<unsigned>(b) & ((1u << m) - 1));
                op(b ^ (1 << m), b) = parity % 2 ? -1.0 : 1.0;
            }
            c_.push_back(std::move(op));
        }
    }

    int sites() const { return sites_; }
    int modes() const { return modes_; }
    int dim() const { return dim_; }
    static int mode(int site, int spin) { return 2 * site + spin; }

    const FockOperator& c(int m) const { return c_[m]; }
    FockOperator cdag(int m) const { return c_[m].adjoint(); }
    const FockOperator& c(int site, int spin) const { return c_[mode(site, spin)]; }
    FockOperator identity() const { return FockOperator::Identity(dim_, dim_); }

    // c_{q,σ} = L^{-1/2} Σ_j e^{-i k j} c_{j,σ}, k = 2π q / L
    FockOperator ck(int q, int spin) const {
        FockOperator op = FockOperator::Zero(dim_, dim_);
        const double k = 2.0 * std::numbers::pi * q / sites_;
        for (int j = 0; j < sites_; ++j) op += std::polar(1.0, -k * j) * c(j, spin);
        return op / std::sqrt(static_cast<double>(sites_));
    }

    int minus_q(int q) const { return (sites_ - q) % sites_; }

    // max deviation from {c_a, c_b†} = δ_ab and {c_a, c_b} = 0
    double car_residual() const {
        double r = 0;
        for (int a = 0; a < modes_; ++a)
            for (int b = 0; b < modes_; ++b) {
                FockOperator ac = c_[a] * cdag(b) + cdag(b) * c_[a];
                if (a == b) ac -= identity();
                FockOperator aa = c_[a] * c_[b] + c_[b] * c_[a];
                r = std::max({r, ac.cwiseAbs().maxCoeff(), aa.cwiseAbs().maxCoeff()});
            }
        return r;
    }

private:
    int sites_, modes_, dim_;
    std::vector<FockOperator> c_;
};

inline cplx expect(const FockOperator& rho, const FockOperator& op) {
    // Tr(ρ op) without forming the product
    return (rho.transpose().cwiseProduct(op)).sum();
}

// Gaussian state for a set of fermionic operators ψ_i obeying the canonical
// relations, with correlation matrix C_ij = <ψ_i† ψ_j>.
struct GaussianFockState {
    FockOperator rho;
    std::vector<FockOperator> psi;
    Eigen::MatrixXcd corr;

    static GaussianFockState from_correlation(const FockSpace& fs, std::vector<FockOperator> psi,
                                              const Eigen::MatrixXcd& C) {
        const int n = static_cast<int>(psi.size());
        if (C.rows() != n || C.cols() != n) throw DimensionError("correlation matrix size mismatch");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (C + C.adjoint()));
        const auto& lam = es.eigenvalues();
        const auto& V = es.eigenvectors();
        FockOperator rho = fs.identity();
        const FockOperator id = fs.identity();
        for (int a = 0; a < n; ++a) {
            FockOperator g = FockOperator::Zero(fs.dim(), fs.dim());
            for (int j = 0; j < n; ++j) g += V(j, a) * psi[j];
            const FockOperator na = g.adjoint() * g;
            rho = rho * (lam(a) * na + (1.0 - lam(a)) * (id - na));
        }
        return {rho, std::move(psi), C};
    }

    // zero anomalous part, G_ab = <c_a† c_b>
    static GaussianFockState normal(const FockSpace& fs, const Eigen::MatrixXcd& G) {
        std::vector<FockOperator> psi;
        for (int m = 0; m < fs.modes(); ++m) psi.push_back(fs.c(m));
        return from_correlation(fs, std::move(psi), G);
    }

    // Pairs (c_{q↑}, c†_{-q↓}) with block [[n_q, Δ_q], [Δ_q*, 1 - n_q]].
    static GaussianFockState bcs(const FockSpace& fs, const BcsState& s) {
        const int L = fs.sites();
        if (static_cast<int>(s.size()) != L) throw DimensionError("BCS state needs one mode per site");
        for (int q = 0; q < L; ++q) {
            const int mq = fs.minus_q(q);
            if (std::abs(s.n[q] - s.n[mq]) > 1e-14 || std::abs(s.d[q] - s.d[mq]) > 1e-14)
                throw ConfigError("oracle: BCS state must be symmetric under k -> -k");
        }
        std::vector<FockOperator> psi;
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2 * L, 2 * L);
        for (int q = 0; q < L; ++q) {
            psi.push_back(fs.ck(q, 0));
            psi.push_back(fs.ck(fs.minus_q(q), 1).adjoint());
            C(2 * q, 2 * q) = s.n[q];
            C(2 * q, 2 * q + 1) = s.d[q];
            C(2 * q + 1, 2 * q) = std::conj(s.d[q]);
            C(2 * q + 1, 2 * q + 1) = 1.0 - s.n[q];
        }
        return from_correlation(fs, std::move(psi), C);
    }

    double trace_residual() const { return std::abs(rho.trace() - 1.0); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<FockOperator> es(0.5 * (rho + rho.adjoint()));
        return es.eigenvalues().minCoeff();
    }

    double two_point_residual() const {
        double r = 0;
        for (std::size_t i = 0; i < psi.size(); ++i)
            for (std::size_t j = 0; j < psi.size(); ++j)
                r = std::max(r, std::abs(expect(rho, psi[i].adjoint() * psi[j]) - corr(i, j)));
        return r;
    }

    // <ψa† ψb† ψc ψd> = C_ad C_bc - C_ac C_bd on random index quadruples
    double wick_residual(std::mt19937_64& rng, int samples = 32) const {
        std::uniform_int_distribution<int> pick(0, static_cast<int>(psi.size()) - 1);
        double r = 0;
        for (int s = 0; s < samples; ++s) {
            int a = pick(rng), b = pick(rng), c = pick(rng), d = pick(rng);
            const cplx lhs = expect(rho, psi[a].adjoint() * psi[b].adjoint() * psi[c] * psi[d]);
            const cplx rhs = corr(a, d) * corr(b, c) - corr(a, c) * corr(b, d);
            r = std::max(r, std::abs(lhs - rhs));
        }
        return r;
    }
};

}  // namespace hybcs::oracle
