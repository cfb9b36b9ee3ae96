#pragma once

// Static analysis of a reactor: the safety margin rho around the limiting
// segment, the critical decant fraction r*, the cycle counts N^rho / Nbar,
// the biomass threshold X(s0) and the overall outcome verdict.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scf/orbit_geometry.hpp"
#include "scf/regions.hpp"
#include "scf/roots.hpp"

namespace scf {

inline constexpr double marginal_mu_tol = 1e-9;
inline constexpr double rho_tol = 1e-9;
inline constexpr double r_star_tol = 1e-6;
inline constexpr double marginal_x_rel_tol = 1e-9;

enum class Verdict {
    FailOmega0,
    FailNonpositiveMu,
    MarginalMu,
    PeriodicExists,
    ConvergesToPeriodic,
    FailsAfterFinitelyManyCycles,
    Marginal,
};

constexpr std::string_view to_string(Verdict v) noexcept
{
    switch (v) {
    case Verdict::FailOmega0: return "FailOmega0";
    case Verdict::FailNonpositiveMu: return "FailNonpositiveMu";
    case Verdict::MarginalMu: return "MarginalMu";
    case Verdict::PeriodicExists: return "PeriodicExists";
    case Verdict::ConvergesToPeriodic: return "ConvergesToPeriodic";
    case Verdict::FailsAfterFinitelyManyCycles: return "FailsAfterFinitelyManyCycles";
    case Verdict::Marginal: return "Marginal";
    }
    return "unknown";
}

/// Least integer strictly greater than x. Arguments within 1e-9 of an
/// integer are treated as that integer, so exact powers of (1-r) land on
/// the next count rather than on rounding noise.
inline long least_integer_greater(double x)
{
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)))
        return static_cast<long>(nearest) + 1;
    return static_cast<long>(std::floor(x)) + 1;
}

// ---------------------------------------------------------------------------
// rho

struct RhoResult {
    double value = 0.0;
    double sigma = 0.0;
    bool equals_sigma = false;
    /// (z, I(s~(z))) pairs evaluated while locating rho, ascending in z.
    std::vector<std::pair<double, double>> samples;
};

/// s~(z) = s_hat_plus - (0, z/y2, ..., z/yn), so that V_i(s~(z)) = -z.
inline Vec s_tilde(const ReactorConfig& cfg, double z)
{
    Vec s = s_hat_plus(cfg);
    for (std::size_t i = 1; i < cfg.n; ++i)
        s[i] -= z * cfg.Y[i];
    return s;
}

inline RhoResult rho(const ReactorConfig& cfg, const QuadratureSettings& q = {})
{
    RhoResult out;
    out.sigma = sigma(cfg);
    const double mu = mu_of_r(cfg, q);
    if (!(mu > 0.0))
        throw Error(ErrorCode::NonpositiveMu, "rho requires mu(r) > 0, got " + std::to_string(mu));
    if (!std::isfinite(out.sigma)) {
        out.value = out.sigma;
        out.equals_sigma = true;
        return out;
    }

    auto growth = [&](double z) {
        const double I = growth_integral(Segment(cfg, s_tilde(cfg, z)), q);
        out.samples.emplace_back(z, I);
        return I;
    };
    out.samples.emplace_back(0.0, mu);

    // Walk toward sigma until the growth turns negative.
    double lo = 0.0;
    std::optional<double> hi;
    for (int k = 1; k <= 10; ++k) {
        const double z = out.sigma * (1.0 - std::pow(10.0, -k));
        const double I = growth(z);
        if (I < 0.0) {
            hi = z;
            break;
        }
        if (I == 0.0) {
            lo = z;
            hi = z;
            break;
        }
        lo = z;
    }

    if (!hi) {
        out.value = out.sigma;
        out.equals_sigma = true;
    } else if (*hi == lo) {
        out.value = lo;
    } else {
        out.value = bracketed_root(growth, lo, *hi, rho_tol).root;
    }

    std::sort(out.samples.begin(), out.samples.end());
    const double slack = 10.0 * std::max(q.abs_tol, q.rel_tol * std::abs(mu));
    for (std::size_t i = 1; i < out.samples.size(); ++i)
        if (out.samples[i].second > out.samples[i - 1].second + slack)
            throw Error(ErrorCode::NonMonotone, "I(s~(z)) increased between z = " +
                                                    std::to_string(out.samples[i - 1].first) + " and z = " +
                                                    std::to_string(out.samples[i].first));
    return out;
}

// ---------------------------------------------------------------------------
// r*

/// Critical decant fraction, or nullopt when mu(1) <= 0.
inline std::optional<double> r_star(const ReactorConfig& cfg, const QuadratureSettings& q = {})
{
    if (region_of(cfg, cfg.s_in).region != Region::Omega1)
        throw Error(ErrorCode::NotInOmega1, "r* requires s_in in Omega1");
    if (!(mu_of_r(cfg, 1.0, q) > 0.0))
        return std::nullopt;
    auto [lo, hi] = bisect_predicate([&](double r) { return mu_of_r(cfg, r, q) <= 0.0; }, 0.0, 1.0, r_star_tol);
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// N^rho, Nbar

inline long n_rho(const ReactorConfig& cfg, std::span<const double> s0, double rho_value)
{
    if (region_of(cfg, s0).region != Region::Omega1)
        throw Error(ErrorCode::NotInOmega1, "N^rho requires s0 in Omega1");
    if (!std::isfinite(rho_value))
        return 1;
    const LyapunovVector V = lyapunov_v(cfg, s0);
    const double shrink = -std::log(1.0 - cfg.r);
    long n = 1;
    for (std::size_t i = 1; i < cfg.n; ++i)
        if (V.v[i] <= -rho_value)
            n = std::max(n, least_integer_greater(std::log(V.v[i] / -rho_value) / shrink));
    return n;
}

inline long n_bar(const ReactorConfig& cfg, double rho_value)
{
    if (region_of(cfg, cfg.s_in).region != Region::Omega1)
        throw Error(ErrorCode::NotInOmega1, "Nbar requires s_in in Omega1");
    if (!std::isfinite(rho_value) || cfg.n < 2)
        return 1;
    const Vec vb = vbar(cfg);
    const double shrink = -std::log(1.0 - cfg.r);
    long n = std::numeric_limits<long>::min();
    for (std::size_t i = 1; i < cfg.n; ++i)
        n = std::max(n, least_integer_greater(std::log(vb[i] / -rho_value) / shrink));
    return n;
}

// ---------------------------------------------------------------------------
// X(s0)

struct ThresholdResult {
    double value = 0.0;
    long n_rho = 1;
    /// (1-r)^(1-k) I(s^(k-1)) for k = 1..N^rho.
    std::vector<double> terms;
    std::vector<double> prefix_sums;
    /// Resource iterates s^0 .. s^(N^rho - 1).
    std::vector<Vec> iterates;
};

struct GrowthTerms {
    /// (1-r)^(1-k) I(s^(k-1)) for k = 1..count.
    std::vector<double> terms;
    /// Resource iterates s^0 .. s^(count-1) of the cycle map g(phi_1(.)).
    std::vector<Vec> iterates;
};

inline GrowthTerms growth_terms(const ReactorConfig& cfg, std::span<const double> s0, long count,
                                const QuadratureSettings& q = {})
{
    GrowthTerms out;
    Vec s(s0.begin(), s0.end());
    double weight = 1.0; // (1-r)^(1-k)
    for (long k = 1; k <= count; ++k) {
        const Segment seg(cfg, s);
        out.terms.push_back(weight * growth_integral(seg, q));
        out.iterates.push_back(s);
        s = refill(cfg, phi_nu(seg, 1.0));
        weight /= (1.0 - cfg.r);
    }
    return out;
}

inline ThresholdResult x_threshold(const ReactorConfig& cfg, std::span<const double> s0, double rho_value,
                                   const QuadratureSettings& q = {})
{
    ThresholdResult out;
    out.n_rho = n_rho(cfg, s0, rho_value);
    GrowthTerms g = growth_terms(cfg, s0, out.n_rho, q);
    double sum = 0.0;
    for (double t : g.terms) {
        sum += t;
        out.prefix_sums.push_back(sum);
    }
    out.terms = std::move(g.terms);
    out.iterates = std::move(g.iterates);
    out.value = -*std::min_element(out.prefix_sums.begin(), out.prefix_sums.end());
    return out;
}

inline ThresholdResult x_threshold(const ReactorConfig& cfg, std::span<const double> s0,
                                   const QuadratureSettings& q = {})
{
    return x_threshold(cfg, s0, rho(cfg, q).value, q);
}

// ---------------------------------------------------------------------------
// verdict

struct VerdictResult {
    Verdict verdict = Verdict::Marginal;
    RegionVerdict input_region;
    std::optional<RegionVerdict> initial_region;
    std::optional<double> mu;
    std::optional<double> x_threshold;
    std::optional<double> periodic_x_post;
    std::optional<double> periodic_x_pre;
};

/// Outcome predicted for the solution starting at (s0, x0). Without x0 the
/// verdict only describes the reactor (PeriodicExists in the good case).
inline VerdictResult theorem_main_verdict(const ReactorConfig& cfg, std::span<const double> s0,
                                          std::optional<double> x0, const QuadratureSettings& q = {})
{
    if (x0 && !(*x0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "verdict requires x0 > 0");
    VerdictResult out;
    out.input_region = region_of(cfg, cfg.s_in);
    out.initial_region = region_of(cfg, s0);

    if (out.input_region.region == Region::Omega0) {
        out.verdict = Verdict::FailOmega0;
        return out;
    }
    if (out.input_region.region == Region::BoundaryOmega1) {
        out.verdict = Verdict::Marginal;
        return out;
    }
    const double mu = mu_of_r(cfg, q);
    out.mu = mu;
    if (std::abs(mu) < marginal_mu_tol) {
        out.verdict = Verdict::MarginalMu;
        return out;
    }
    if (mu < 0.0) {
        out.verdict = Verdict::FailNonpositiveMu;
        return out;
    }
    out.periodic_x_post = (1.0 - cfg.r) * mu / cfg.r;
    out.periodic_x_pre = mu / cfg.r;

    switch (out.initial_region->region) {
    case Region::Omega0:
        out.verdict = x0 ? Verdict::FailsAfterFinitelyManyCycles : Verdict::PeriodicExists;
        return out;
    case Region::BoundaryOmega1:
        out.verdict = x0 ? Verdict::Marginal : Verdict::PeriodicExists;
        return out;
    case Region::Omega1: break;
    }

    const double X = x_threshold(cfg, s0, q).value;
    out.x_threshold = X;
    if (!x0)
        out.verdict = Verdict::PeriodicExists;
    else if (std::abs(*x0 - X) <= marginal_x_rel_tol * std::max(1.0, std::abs(X)))
        out.verdict = Verdict::Marginal;
    else if (*x0 > X)
        out.verdict = Verdict::ConvergesToPeriodic;
    else
        out.verdict = Verdict::FailsAfterFinitelyManyCycles;
    return out;
}

// ---------------------------------------------------------------------------
// full report

struct AnalysisReport {
    Vec vbar;
    RegionVerdict region_of_input;
    std::optional<double> mu_r;
    std::optional<double> r_star;
    bool r_star_none = false;
    std::optional<double> sigma;
    std::optional<double> rho;
    bool rho_equals_sigma = false;
    std::optional<Vec> s_hat_plus;
    std::optional<double> periodic_x_post;
    std::optional<double> periodic_x_pre;
    std::optional<double> periodic_cycle_time;
    Vec s0;
    std::optional<double> x0;
    std::optional<RegionVerdict> region_of_initial;
    std::optional<long> n_rho;
    std::optional<long> n_bar;
    std::optional<double> x_threshold;
    std::vector<double> x_threshold_terms;
    Verdict verdict = Verdict::Marginal;
};

/// Everything the classification computes for one reactor and an optional
/// initial condition (defaults to s0 = s_in).
inline AnalysisReport analyze(const ReactorConfig& cfg, std::optional<Vec> s0_opt = std::nullopt,
                              std::optional<double> x0 = std::nullopt, const QuadratureSettings& q = {})
{
    AnalysisReport rep;
    rep.vbar = vbar(cfg);
    rep.region_of_input = region_of(cfg, cfg.s_in);
    rep.s0 = s0_opt.value_or(cfg.s_in);
    rep.x0 = x0;
    rep.region_of_initial = region_of(cfg, rep.s0);

    const VerdictResult v = theorem_main_verdict(cfg, rep.s0, x0, q);
    rep.verdict = v.verdict;
    if (rep.region_of_input.region != Region::Omega1)
        return rep;

    rep.sigma = sigma(cfg);
    rep.s_hat_plus = s_hat_plus(cfg);
    rep.mu_r = mu_of_r(cfg, q);
    const auto rs = r_star(cfg, q);
    rep.r_star = rs;
    rep.r_star_none = !rs.has_value();
    if (!(*rep.mu_r > 0.0))
        return rep;

    rep.periodic_x_post = (1.0 - cfg.r) * *rep.mu_r / cfg.r;
    rep.periodic_x_pre = *rep.mu_r / cfg.r;
    rep.periodic_cycle_time = cycle_time(Segment(cfg, *rep.s_hat_plus), *rep.periodic_x_post, q);
    const RhoResult rr = rho(cfg, q);
    rep.rho = rr.value;
    rep.rho_equals_sigma = rr.equals_sigma;
    rep.n_bar = n_bar(cfg, rr.value);
    if (rep.region_of_initial->region == Region::Omega1) {
        const ThresholdResult th = x_threshold(cfg, rep.s0, rr.value, q);
        rep.n_rho = th.n_rho;
        rep.x_threshold = th.value;
        rep.x_threshold_terms = th.terms;
    }
    return rep;
}

} // namespace scf
