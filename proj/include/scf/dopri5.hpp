#pragma once

// Dormand-Prince 5(4) with step-size control and the 4th-order continuous
// extension for dense output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "scf/error.hpp"

namespace scf {

namespace dp {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

// 5th-order solution minus embedded 4th-order solution.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

} // namespace dp

struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double safety = 0.9;
    double fac_min = 0.2;
    double fac_max = 10.0;
    double h_max = HUGE_VAL;
    /// Per-component absolute tolerances; empty means abs_tol everywhere.
    std::vector<double> component_abs_tol;

    [[nodiscard]] double atol(std::size_t i) const
    {
        return i < component_abs_tol.size() ? component_abs_tol[i] : abs_tol;
    }
};

/// Adaptive integrator for y' = f(t, y). `Rhs` is callable as
/// `void(double t, const std::vector<double>& y, std::vector<double>& dydt)`.
template <class Rhs>
class DormandPrince {
public:
    using State = std::vector<double>;

    DormandPrince(Rhs rhs, double t0, State y0, StepControl ctl = {})
        : rhs_(std::move(rhs)), ctl_(ctl), t_(t0), y_(std::move(y0))
    {
        const std::size_t n = y_.size();
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ynew_, &ytmp_, &r1_, &r2_, &r3_, &r4_, &r5_})
            v->assign(n, 0.0);
        rhs_(t_, y_, k1_);
        h_ = initial_step();
    }

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] const State& y() const noexcept { return y_; }
    [[nodiscard]] double t_prev() const noexcept { return t_prev_; }
    [[nodiscard]] double step_size() const noexcept { return h_; }
    [[nodiscard]] std::size_t accepted() const noexcept { return accepted_; }
    [[nodiscard]] std::size_t rejected() const noexcept { return rejected_; }

    /// Takes one accepted step, never beyond t_limit.
    void step(double t_limit)
    {
        using namespace dp;
        const std::size_t n = y_.size();
        for (;;) {
            double h = std::min(h_, ctl_.h_max);
            bool clipped = false;
            if (t_ + h >= t_limit) {
                h = t_limit - t_;
                clipped = true;
            }
            if (!(h > 1e-14 * std::max(1.0, std::abs(t_))))
                throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t_));

            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * a21 * k1_[i];
            rhs_(t_ + c2 * h, ytmp_, k2_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
            rhs_(t_ + c3 * h, ytmp_, k3_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
            rhs_(t_ + c4 * h, ytmp_, k4_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
            rhs_(t_ + c5 * h, ytmp_, k5_);
            for (std::size_t i = 0; i < n; ++i)
                ytmp_[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
            rhs_(t_ + h, ytmp_, k6_);
            for (std::size_t i = 0; i < n; ++i)
                ynew_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
            rhs_(t_ + h, ynew_, k7_);

            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ei =
                    h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
                const double sc = ctl_.atol(i) + ctl_.rel_tol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
                err += (ei / sc) * (ei / sc);
            }
            err = std::sqrt(err / static_cast<double>(n));
            if (!std::isfinite(err))
                throw Error(ErrorCode::NonFiniteState, "non-finite state at t = " + std::to_string(t_));

            const double fac = err == 0.0 ? ctl_.fac_max
                                          : std::clamp(ctl_.safety * std::pow(err, -0.2), ctl_.fac_min, ctl_.fac_max);
            if (err <= 1.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    r1_[i] = y_[i];
                    r2_[i] = ynew_[i] - y_[i];
                    r3_[i] = h * k1_[i] - r2_[i];
                    r4_[i] = r2_[i] - h * k7_[i] - r3_[i];
                    r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
                }
                t_prev_ = t_;
                h_prev_ = h;
                t_ = clipped ? t_limit : t_ + h;
                y_.swap(ynew_);
                k1_.swap(k7_);
                ++accepted_;
                // Keep the proposed step when the last one was only clipped.
                h_ = clipped ? std::max(h_, h * fac) : h * fac;
                return;
            }
            ++rejected_;
            h_ = h * std::min(1.0, fac);
        }
    }

    /// Dense output on the last accepted step, t in [t_prev(), t()].
    [[nodiscard]] State dense(double t) const
    {
        const double theta = (t - t_prev_) / h_prev_;
        const double theta1 = 1.0 - theta;
        State out(y_.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
        return out;
    }

    [[nodiscard]] double dense_component(std::size_t i, double t) const
    {
        const double theta = (t - t_prev_) / h_prev_;
        const double theta1 = 1.0 - theta;
        return r1_[i] + theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
    }

private:
    double initial_step()
    {
        // Hairer-Norsett-Wanner starting step heuristic.
        const std::size_t n = y_.size();
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = ctl_.atol(i) + ctl_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1n += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h0 * k1_[i];
        rhs_(t_ + h0, ytmp_, k2_);
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = ctl_.atol(i) + ctl_.rel_tol * std::abs(y_[i]);
            d2 += ((k2_[i] - k1_[i]) / sc) * ((k2_[i] - k1_[i]) / sc);
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dmax = std::max(d1n, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, ctl_.h_max});
    }

    Rhs rhs_;
    StepControl ctl_;
    double t_ = 0.0;
    double t_prev_ = 0.0;
    double h_ = 0.0;
    double h_prev_ = 1.0;
    std::size_t accepted_ = 0;
    std::size_t rejected_ = 0;
    State y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ynew_, ytmp_;
    State r1_, r2_, r3_, r4_, r5_;
};

} // namespace scf
