#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "errors.hpp"

namespace hybcs {

struct IntegratorSettings {
    double rtol = 1e-9;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();  // absolute time units
    double min_step = 0;  // 0 means 1e-12 / W
    long max_steps = 50'000'000;
    int threads = 1;
};

struct IntegratorStats {
    long steps = 0;
    long rejections = 0;
    long rhs_evals = 0;
};

struct Protocol {
    double switch_time = 0;  // rates are off before this time
    double t_max = 0;
    std::vector<double> sample_times;
    std::vector<std::size_t> record_modes;
};

inline double revival_limit(const BandGrid& g) {
    return 0.4 * 2.0 * std::numbers::pi * static_cast<double>(g.n_modes()) / g.bandwidth;
}

// Geometric samples from t_first to t_max, or linear samples on [0, t_max].
inline std::vector<double> log_samples(double t_first, double t_max, std::size_t count) {
    std::vector<double> t(count);
    if (count == 1) return {t_max};
    const double a = std::log(t_first), b = std::log(t_max);
    for (std::size_t i = 0; i < count; ++i)
        t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    t.front() = t_first;
    t.back() = t_max;
    return t;
}

inline std::vector<double> linear_samples(double t_max, std::size_t count) {
    std::vector<double> t(count);
    if (count == 1) return {t_max};
    for (std::size_t i = 0; i < count; ++i)
        t[i] = t_max * static_cast<double>(i) / static_cast<double>(count - 1);
    t.back() = t_max;
    return t;
}

// Column-major table; t_w is time in units of 1/W.
struct TimeSeries {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<std::size_t> tracked_modes;
    std::vector<double> tracked_energies;
    IntegratorStats stats;
    double max_zeta = 0;  // physicality monitor over samples
    double min_nk = 1, max_nk = 0;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw SchemaError("unknown column '" + name + "'");
    }
    const std::vector<double>& column(const std::string& name) const { return columns[index(name)]; }
    const std::vector<double>& t_w() const { return columns.front(); }
};

inline std::vector<std::string> series_header(std::size_t tracked) {
    std::vector<std::string> h = {"t_w", "n", "re_delta", "im_delta", "abs_delta", "zeta_mean"};
    for (std::size_t m = 0; m < tracked; ++m)
        for (const char* c : {"sx_", "sy_", "sz_", "zeta_"}) h.push_back(c + std::to_string(m));
    return h;
}

namespace detail {

inline void axpy_state(BcsState& out, const BcsState& y, double h,
                       std::initializer_list<std::pair<double, const StateDerivative*>> terms) {
    const std::size_t m = y.size();
    out.n.resize(m);
    out.d.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        double a = 0;
        cplx b = 0;
        for (auto& [c, k] : terms) {
            a += c * k->dn[j];
            b += c * k->dd[j];
        }
        out.n[j] = y.n[j] + h * a;
        out.d[j] = y.d[j] + h * b;
    }
}

inline double weighted_rms(const BcsState& y0, const BcsState& y1, const std::vector<double>& en,
                           const std::vector<cplx>& ed, double rtol, double atol) {
    double s = 0;
    const std::size_t m = y0.size();
    for (std::size_t j = 0; j < m; ++j) {
        double sc = atol + rtol * std::max(std::abs(y0.n[j]), std::abs(y1.n[j]));
        s += (en[j] / sc) * (en[j] / sc);
        sc = atol + rtol * std::max(std::abs(y0.d[j].real()), std::abs(y1.d[j].real()));
        s += (ed[j].real() / sc) * (ed[j].real() / sc);
        sc = atol + rtol * std::max(std::abs(y0.d[j].imag()), std::abs(y1.d[j].imag()));
        s += (ed[j].imag() / sc) * (ed[j].imag() / sc);
    }
    return std::sqrt(s / static_cast<double>(3 * std::max<std::size_t>(m, 1)));
}

}  // namespace detail

// Classical RK4.
inline BcsState step_fixed(const BcsState& y, const SystemParams& p, double dt, Exec ex = {}) {
    if (dt == 0) return y;
    if (!(dt > 0)) throw ConfigError("step_fixed: dt must be positive");
    BcsState tmp;
    auto k1 = rhs_total(y, p, ex);
    detail::axpy_state(tmp, y, dt / 2, {{1.0, &k1}});
    tmp.t = y.t + dt / 2;
    auto k2 = rhs_total(tmp, p, ex);
    detail::axpy_state(tmp, y, dt / 2, {{1.0, &k2}});
    auto k3 = rhs_total(tmp, p, ex);
    detail::axpy_state(tmp, y, dt, {{1.0, &k3}});
    tmp.t = y.t + dt;
    auto k4 = rhs_total(tmp, p, ex);
    BcsState out;
    detail::axpy_state(out, y, dt / 6, {{1.0, &k1}, {2.0, &k2}, {2.0, &k3}, {1.0, &k4}});
    out.t = y.t + dt;
    return out;
}

// Dormand-Prince 5(4) with FSAL and PI step-size control.
class AdaptiveStepper {
public:
    AdaptiveStepper(const SystemParams& p, const IntegratorSettings& s) : p_(p), s_(s) {
        if (!(s.rtol > 0) || !(s.atol > 0)) throw ConfigError("integrator: rtol and atol must be positive");
        min_step_ = s.min_step > 0 ? s.min_step : 1e-12 / p.grid->bandwidth;
    }

    void set_params(const SystemParams& p) {
        p_ = p;
        have_k1_ = false;
    }

    const IntegratorStats& stats() const { return stats_; }

    // Advances y by one accepted step no longer than t_limit - y.t and returns
    // (accepted_dt, error_estimate).
    std::pair<double, double> step(BcsState& y, double t_limit) {
        if (!have_k1_) {
            eval(y, k_[0]);
            have_k1_ = true;
            if (h_ <= 0) h_ = initial_step(y);
        }
        bool rejected = false;
        for (;;) {
            double h = std::min(h_, s_.max_step);
            bool clipped = false;
            if (y.t + h >= t_limit) {
                h = t_limit - y.t;
                clipped = true;
            }
            if (h < min_step_ && !clipped) throw StepUnderflowError(y.t, h);
            attempt(y, h);
            const double err = detail::weighted_rms(y, y_new_, e_n_, e_d_, s_.rtol, s_.atol);
            if (err <= 1.0 || (clipped && h < min_step_)) {
                double fac;
                if (err == 0) {
                    fac = kMaxFac;
                } else {
                    fac = kSafety * std::pow(err, -kExp1) * std::pow(err_old_, kBeta);
                    fac = std::clamp(fac, kMinFac, kMaxFac);
                }
                if (rejected) fac = std::min(fac, 1.0);
                err_old_ = std::max(err, 1e-4);
                const double hn = h * fac;
                // a sample time cut the step short: do not let that shrink the step
                h_ = clipped ? std::max(h_, hn) : hn;
                y_new_.t = clipped ? t_limit : y.t + h;
                std::swap(y, y_new_);
                std::swap(k_[0], k_[6]);
                ++stats_.steps;
                return {h, err};
            }
            ++stats_.rejections;
            rejected = true;
            h_ = h * std::max(kMinFac, kSafety * std::pow(err, -0.2));
            if (h_ < min_step_) throw StepUnderflowError(y.t, h_);
        }
    }

private:
    static constexpr double kSafety = 0.9, kMinFac = 0.2, kMaxFac = 10.0;
    static constexpr double kBeta = 0.04, kExp1 = 0.2 - 0.75 * kBeta;

    void eval(const BcsState& y, StateDerivative& k) {
        rhs_total_into(y, p_, k, Exec{s_.threads});
        ++stats_.rhs_evals;
    }

    double initial_step(const BcsState& y) {
        // Hairer-Wanner starting step heuristic
        const std::size_t m = y.size();
        double d0 = 0, d1 = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double sc = s_.atol + s_.rtol * std::abs(y.n[j]);
            d0 += std::pow(y.n[j] / sc, 2);
            d1 += std::pow(k_[0].dn[j] / sc, 2);
            sc = s_.atol + s_.rtol * std::abs(y.d[j]);
            d0 += std::norm(y.d[j]) / (sc * sc);
            d1 += std::norm(k_[0].dd[j]) / (sc * sc);
        }
        d0 = std::sqrt(d0 / (3.0 * m));
        d1 = std::sqrt(d1 / (3.0 * m));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, s_.max_step);
        BcsState y1;
        detail::axpy_state(y1, y, h0, {{1.0, &k_[0]}});
        y1.t = y.t + h0;
        StateDerivative f1;
        eval(y1, f1);
        double d2 = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double sc = s_.atol + s_.rtol * std::abs(y.n[j]);
            d2 += std::pow((f1.dn[j] - k_[0].dn[j]) / sc, 2);
            sc = s_.atol + s_.rtol * std::abs(y.d[j]);
            d2 += std::norm(f1.dd[j] - k_[0].dd[j]) / (sc * sc);
        }
        d2 = std::sqrt(d2 / (3.0 * m)) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100 * h0, h1, s_.max_step});
    }

    void attempt(const BcsState& y, double h) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        // b - b* for the error estimate
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        auto& k = k_;
        detail::axpy_state(tmp_, y, h, {{a21, &k[0]}});
        tmp_.t = y.t + c2 * h;
        eval(tmp_, k[1]);
        detail::axpy_state(tmp_, y, h, {{a31, &k[0]}, {a32, &k[1]}});
        tmp_.t = y.t + c3 * h;
        eval(tmp_, k[2]);
        detail::axpy_state(tmp_, y, h, {{a41, &k[0]}, {a42, &k[1]}, {a43, &k[2]}});
        tmp_.t = y.t + c4 * h;
        eval(tmp_, k[3]);
        detail::axpy_state(tmp_, y, h, {{a51, &k[0]}, {a52, &k[1]}, {a53, &k[2]}, {a54, &k[3]}});
        tmp_.t = y.t + c5 * h;
        eval(tmp_, k[4]);
        detail::axpy_state(tmp_, y, h,
                           {{a61, &k[0]}, {a62, &k[1]}, {a63, &k[2]}, {a64, &k[3]}, {a65, &k[4]}});
        tmp_.t = y.t + h;
        eval(tmp_, k[5]);
        detail::axpy_state(y_new_, y, h,
                           {{b1, &k[0]}, {b3, &k[2]}, {b4, &k[3]}, {b5, &k[4]}, {b6, &k[5]}});
        y_new_.t = y.t + h;
        eval(y_new_, k[6]);
        const std::size_t m = y.size();
        e_n_.resize(m);
        e_d_.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            e_n_[j] = h * (e1 * k[0].dn[j] + e3 * k[2].dn[j] + e4 * k[3].dn[j] + e5 * k[4].dn[j] +
                           e6 * k[5].dn[j] + e7 * k[6].dn[j]);
            e_d_[j] = h * (e1 * k[0].dd[j] + e3 * k[2].dd[j] + e4 * k[3].dd[j] + e5 * k[4].dd[j] +
                           e6 * k[5].dd[j] + e7 * k[6].dd[j]);
        }
    }

    SystemParams p_;
    IntegratorSettings s_;
    double min_step_;
    double h_ = 0;
    double err_old_ = 1e-4;
    bool have_k1_ = false;
    std::array<StateDerivative, 7> k_;
    BcsState tmp_, y_new_;
    std::vector<double> e_n_;
    std::vector<cplx> e_d_;
    IntegratorStats stats_;
};

struct AdaptiveStep {
    BcsState state;
    double accepted_dt;
    double error_estimate;
};

// One accepted adaptive step from a fresh controller.
inline AdaptiveStep step_adaptive(const BcsState& y, const SystemParams& p, double rtol, double atol,
                                  double t_limit = std::numeric_limits<double>::infinity()) {
    IntegratorSettings s;
    s.rtol = rtol;
    s.atol = atol;
    AdaptiveStepper st(p, s);
    AdaptiveStep out{y, 0, 0};
    auto [h, e] = st.step(out.state, t_limit);
    out.accepted_dt = h;
    out.error_estimate = e;
    return out;
}

namespace detail {

inline void record(TimeSeries& ts, const BcsState& y, const BandGrid& g) {
    const double n = density(y, g);
    const cplx D = order_parameter(y, g);
    std::vector<double> z(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        z[j] = zeta(y.n[j], y.d[j]);
        ts.max_zeta = std::max(ts.max_zeta, z[j]);
        ts.min_nk = std::min(ts.min_nk, y.n[j]);
        ts.max_nk = std::max(ts.max_nk, y.n[j]);
    }
    std::size_t c = 0;
    ts.columns[c++].push_back(y.t * g.bandwidth);
    ts.columns[c++].push_back(n);
    ts.columns[c++].push_back(D.real());
    ts.columns[c++].push_back(D.imag());
    ts.columns[c++].push_back(std::abs(D));
    ts.columns[c++].push_back(fixed_sum(g.weights, z));
    for (std::size_t m : ts.tracked_modes) {
        ts.columns[c++].push_back(2.0 * y.d[m].real());
        ts.columns[c++].push_back(2.0 * y.d[m].imag());
        ts.columns[c++].push_back(2.0 * y.n[m] - 1.0);
        ts.columns[c++].push_back(z[m]);
    }
}

}  // namespace detail

inline TimeSeries run_protocol(const BcsState& initial, const SystemParams& params,
                               const Protocol& protocol, const IntegratorSettings& settings = {}) {
    params.validate();
    const BandGrid& g = *params.grid;
    if (initial.size() != g.n_modes() || initial.d.size() != g.n_modes())
        throw DimensionError("initial state size does not match grid");
    if (!(protocol.t_max > 0)) throw ConfigError("time.t_max_w: must be positive");
    if (protocol.t_max > revival_limit(g) * (1 + 1e-12))
        throw ConfigError("time.t_max_w: exceeds the revival guard 0.4*2*pi*n_modes");
    const auto& st = protocol.sample_times;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (st[i] < initial.t || st[i] > protocol.t_max)
            throw ConfigError("protocol: sample times must lie in [t0, t_max]");
        if (i > 0 && !(st[i] > st[i - 1]))
            throw ConfigError("protocol: sample times must be strictly increasing");
    }
    for (std::size_t m : protocol.record_modes)
        if (m >= g.n_modes()) throw ConfigError("protocol: tracked mode out of range");

    TimeSeries ts;
    ts.tracked_modes = protocol.record_modes;
    for (std::size_t m : ts.tracked_modes) ts.tracked_energies.push_back(g.energies[m]);
    ts.names = series_header(ts.tracked_modes.size());
    ts.columns.resize(ts.names.size());
    for (auto& c : ts.columns) c.reserve(st.size());

    SystemParams off = params;
    off.gamma = 0;
    off.pump = 0;
    const bool before_switch = initial.t < protocol.switch_time;
    AdaptiveStepper stepper(before_switch ? off : params, settings);
    bool switched = !before_switch;

    BcsState y = initial;
    std::size_t next = 0;
    while (next < st.size() && st[next] == y.t) detail::record(ts, y, g), ++next;
    const double t_end = protocol.t_max;
    long guard = 0;
    while (y.t < t_end) {
        double limit = next < st.size() ? st[next] : t_end;
        if (!switched) limit = std::min(limit, protocol.switch_time);
        stepper.step(y, limit);
        if (++guard > settings.max_steps) throw IntegrationError("step budget exhausted", y.t);
        if (!switched && y.t >= protocol.switch_time) {
            stepper.set_params(params);
            switched = true;
        }
        while (next < st.size() && st[next] == y.t) detail::record(ts, y, g), ++next;
    }
    ts.stats = stepper.stats();
    return ts;
}

}  // namespace hybcs
