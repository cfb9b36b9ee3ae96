#pragma once

// Parameters, state and the two maps that define the fermentor: the
// between-impulse uptake rate F and the decant/refill impulse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scf/error.hpp"

namespace scf {

using Vec = std::vector<double>;

inline constexpr double default_event_tol = 1e-10;

struct MonodParams {
    double mu_max = 1.0;
    double k = 1.0;

    [[nodiscard]] double operator()(double s) const noexcept { return mu_max * s / (k + s); }
    /// Slope at s = 0, the largest slope of the curve on s >= 0.
    [[nodiscard]] double max_slope() const noexcept { return mu_max / k; }

    friend bool operator==(const MonodParams&, const MonodParams&) = default;
};

enum class UptakeKind { LiebigMin, Product };

struct UptakeLaw {
    UptakeKind kind = UptakeKind::LiebigMin;
    std::vector<MonodParams> per_resource;

    friend bool operator==(const UptakeLaw&, const UptakeLaw&) = default;
};

struct ReactorConfig {
    std::size_t n = 1;
    double D = 0.0;      // decay rate
    double r = 0.5;      // decant fraction
    Vec Y;               // inverse yields 1/y_i
    Vec s_in;            // fresh-medium concentrations
    double s1_bar = 0.0; // decant threshold on resource 1
    UptakeLaw uptake;

    /// Yield coefficient y_i = 1/Y_i (0-based index).
    [[nodiscard]] double yield(std::size_t i) const { return 1.0 / Y.at(i); }
    /// Image of the threshold under the impulse, r s1_in + (1-r) s1_bar.
    [[nodiscard]] double s1_bar_plus() const { return r * s_in.at(0) + (1.0 - r) * s1_bar; }

    friend bool operator==(const ReactorConfig&, const ReactorConfig&) = default;
};

struct State {
    Vec s;
    double x = 0.0;
    double t = 0.0;
};

struct Violation {
    std::string code;
    std::string message;
};

// ---------------------------------------------------------------------------

inline std::vector<Violation> validate_config(const ReactorConfig& cfg)
{
    std::vector<Violation> out;
    auto add = [&out](std::string code, std::string msg) {
        out.push_back({std::move(code), std::move(msg)});
    };
    auto finite_all = [](const Vec& v) {
        return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
    };

    if (cfg.n < 1)
        add("n_invalid", "resource count n must be >= 1");
    if (!std::isfinite(cfg.D) || cfg.D < 0.0)
        add("D_negative", "decay rate D must be finite and >= 0");
    if (!std::isfinite(cfg.r) || !(cfg.r > 0.0 && cfg.r < 1.0))
        add("r_out_of_range", "decant fraction r must lie in (0,1)");

    if (cfg.Y.size() != cfg.n)
        add("Y_length", "Y must have n entries");
    else if (!finite_all(cfg.Y) || std::any_of(cfg.Y.begin(), cfg.Y.end(), [](double a) { return a <= 0.0; }))
        add("Y_nonpositive", "every inverse yield Y_i must be finite and > 0");

    if (cfg.s_in.size() != cfg.n)
        add("s_in_length", "s_in must have n entries");
    else if (!finite_all(cfg.s_in) ||
             std::any_of(cfg.s_in.begin(), cfg.s_in.end(), [](double a) { return a <= 0.0; }))
        add("s_in_nonpositive", "every input concentration must be finite and > 0");

    if (!std::isfinite(cfg.s1_bar) || cfg.s1_bar <= 0.0)
        add("s1_bar_nonpositive", "threshold s1_bar must be finite and > 0");
    else if (!cfg.s_in.empty() && cfg.s1_bar >= cfg.s_in[0])
        add("threshold_above_input", "threshold s1_bar must be below s1_in");

    if (cfg.uptake.per_resource.size() != cfg.n)
        add("monod_length", "uptake.monod must have n entries");
    for (std::size_t i = 0; i < cfg.uptake.per_resource.size(); ++i) {
        const auto& m = cfg.uptake.per_resource[i];
        if (!std::isfinite(m.mu_max) || m.mu_max <= 0.0)
            add("monod_mu_max_nonpositive", "uptake.monod[" + std::to_string(i) + "].mu_max must be > 0");
        if (!std::isfinite(m.k) || m.k <= 0.0)
            add("monod_k_nonpositive", "uptake.monod[" + std::to_string(i) + "].k must be > 0");
    }
    return out;
}

[[nodiscard]] inline bool is_valid(const ReactorConfig& cfg) { return validate_config(cfg).empty(); }

/// Uptake rate without argument checks. Negative entries are treated as 0 so
/// that integrator stages straying across a face see F = 0.
[[nodiscard]] inline double uptake_rate(const UptakeLaw& law, std::span<const double> s) noexcept
{
    const std::size_t n = std::min(s.size(), law.per_resource.size());
    if (law.kind == UptakeKind::LiebigMin) {
        double f = HUGE_VAL;
        for (std::size_t i = 0; i < n; ++i)
            f = std::min(f, law.per_resource[i](std::max(s[i], 0.0)));
        return f;
    }
    double f = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        f *= law.per_resource[i](std::max(s[i], 0.0));
    return f;
}

/// Index of the minimizing Monod term for Liebig uptake; 0 for product uptake.
[[nodiscard]] inline std::size_t limiting_resource(const UptakeLaw& law, std::span<const double> s) noexcept
{
    std::size_t arg = 0;
    if (law.kind != UptakeKind::LiebigMin)
        return arg;
    const std::size_t n = std::min(s.size(), law.per_resource.size());
    double f = HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = law.per_resource[i](std::max(s[i], 0.0));
        if (g < f) {
            f = g;
            arg = i;
        }
    }
    return arg;
}

[[nodiscard]] inline double eval_F(const ReactorConfig& cfg, std::span<const double> s)
{
    if (s.size() != cfg.n || cfg.uptake.per_resource.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch,
                    "eval_F expects " + std::to_string(cfg.n) + " concentrations, got " + std::to_string(s.size()));
    for (double v : s)
        if (!(v >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "eval_F requires nonnegative concentrations");
    return uptake_rate(cfg.uptake, s);
}

/// Lipschitz constant of F in the sup norm on the nonnegative cone.
[[nodiscard]] inline double lipschitz_bound(const ReactorConfig& cfg)
{
    const auto& m = cfg.uptake.per_resource;
    if (cfg.uptake.kind == UptakeKind::LiebigMin) {
        double L = 0.0;
        for (const auto& p : m)
            L = std::max(L, p.max_slope());
        return L;
    }
    // Each factor is bounded by mu_max, so the product rule gives
    // sum_i L_i prod_{j != i} mu_j.
    double L = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        double term = m[i].max_slope();
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != i)
                term *= m[j].mu_max;
        L += term;
    }
    return L;
}

/// Decant/refill jump. The pre-impulse state must sit on the threshold.
[[nodiscard]] inline State impulse_map(const ReactorConfig& cfg, const State& pre,
                                       double event_tol = default_event_tol)
{
    if (pre.s.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch, "impulse_map state has wrong dimension");
    if (!(std::abs(pre.s[0] - cfg.s1_bar) <= event_tol))
        throw Error(ErrorCode::TriggerNotMet, "impulse requires s1 == s1_bar (|s1 - s1_bar| = " +
                                                  std::to_string(std::abs(pre.s[0] - cfg.s1_bar)) + ")");
    State post;
    post.s.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i)
        post.s[i] = cfg.r * cfg.s_in[i] + (1.0 - cfg.r) * pre.s[i];
    post.x = (1.0 - cfg.r) * pre.x;
    post.t = pre.t;
    return post;
}

/// The resource part of the impulse, g(s) = r s_in + (1-r) s, with no trigger check.
[[nodiscard]] inline Vec refill(const ReactorConfig& cfg, std::span<const double> s)
{
    Vec out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i] = cfg.r * cfg.s_in.at(i) + (1.0 - cfg.r) * s[i];
    return out;
}

} // namespace scf
