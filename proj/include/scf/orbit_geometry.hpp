#pragma once

// Between-impulse geometry in the nu-parameterization.
//
// On a flow arc the resources move along a straight line in direction Y and
// nu in [0,1] is the fraction of s1 consumed on the way from s0 down to the
// threshold. Biomass and elapsed time are then one-dimensional integrals
// over nu.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "scf/core_model.hpp"
#include "scf/quadrature.hpp"
#include "scf/regions.hpp"
#include "scf/roots.hpp"

namespace scf {

class Segment {
public:
    Segment(const ReactorConfig& cfg, Vec s0) : cfg_(&cfg), s0_(std::move(s0))
    {
        if (s0_.size() != cfg.n)
            throw Error(ErrorCode::DimensionMismatch, "segment start has wrong dimension");
        if (s0_[0] < cfg.s1_bar - default_event_tol)
            throw Error(ErrorCode::InvalidArgument, "segment start must satisfy s1 >= s1_bar");
        length_ = cfg.yield(0) * std::max(s0_[0] - cfg.s1_bar, 0.0);
    }

    [[nodiscard]] const ReactorConfig& config() const noexcept { return *cfg_; }
    [[nodiscard]] const Vec& start() const noexcept { return s0_; }
    /// y1 (s0_1 - s1_bar), the factor in front of every nu-integral.
    [[nodiscard]] double length() const noexcept { return length_; }

    /// Component i of phi_nu(s0), unchecked.
    [[nodiscard]] double coord(std::size_t i, double nu) const noexcept
    {
        return s0_[i] - nu * length_ * cfg_->Y[i];
    }

    /// F(phi_nu(s0)) without allocating.
    [[nodiscard]] double rate(double nu) const noexcept
    {
        const auto& law = cfg_->uptake;
        if (law.kind == UptakeKind::LiebigMin) {
            double f = HUGE_VAL;
            for (std::size_t i = 0; i < s0_.size(); ++i)
                f = std::min(f, law.per_resource[i](std::max(coord(i, nu), 0.0)));
            return f;
        }
        double f = 1.0;
        for (std::size_t i = 0; i < s0_.size(); ++i)
            f *= law.per_resource[i](std::max(coord(i, nu), 0.0));
        return f;
    }

    /// Whether phi_nu stays strictly inside the positive cone for nu in [0,1].
    [[nodiscard]] bool stays_positive() const noexcept
    {
        for (std::size_t i = 0; i < s0_.size(); ++i)
            if (!(coord(i, 1.0) > 0.0))
                return false;
        return true;
    }

private:
    const ReactorConfig* cfg_;
    Vec s0_;
    double length_ = 0.0;
};

inline Vec phi_nu(const Segment& seg, double nu)
{
    if (!(nu >= 0.0 && nu <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "phi_nu requires nu in [0,1]");
    Vec out(seg.start().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = seg.coord(i, nu);
    // Land the decant coordinate exactly on the threshold.
    if (nu == 1.0 && seg.length() > 0.0)
        out[0] = seg.config().s1_bar;
    return out;
}

/// Start of the limiting segment through s_in, at s1 = r s1_in + (1-r) s1_bar.
inline Vec s_hat_plus(const ReactorConfig& cfg, double r)
{
    const double c = (1.0 - r) * cfg.yield(0) * (cfg.s_in[0] - cfg.s1_bar);
    Vec out(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i)
        out[i] = cfg.s_in[i] - c * cfg.Y[i];
    return out;
}

inline Vec s_hat_plus(const ReactorConfig& cfg) { return s_hat_plus(cfg, cfg.r); }

/// Values of nu in (0, nu_end) where the minimizing Monod term switches.
/// Empty for product uptake.
inline std::vector<double> liebig_kinks(const Segment& seg, double nu_end = 1.0, int grid = 256)
{
    std::vector<double> kinks;
    const auto& cfg = seg.config();
    if (cfg.uptake.kind != UptakeKind::LiebigMin || seg.length() == 0.0 || cfg.n < 2)
        return kinks;
    const auto& m = cfg.uptake.per_resource;
    auto term = [&](std::size_t i, double nu) { return m[i](std::max(seg.coord(i, nu), 0.0)); };

    for (std::size_t i = 0; i < cfg.n; ++i) {
        for (std::size_t j = i + 1; j < cfg.n; ++j) {
            auto diff = [&](double nu) { return term(i, nu) - term(j, nu); };
            double a = 0.0, fa = diff(0.0);
            for (int g = 1; g <= grid; ++g) {
                const double b = nu_end * g / grid;
                const double fb = diff(b);
                if (fa != 0.0 && fb != 0.0 && std::signbit(fa) != std::signbit(fb)) {
                    const double nu = bracketed_root(diff, a, b, 1e-12).root;
                    double lowest = HUGE_VAL;
                    for (std::size_t k = 0; k < cfg.n; ++k)
                        lowest = std::min(lowest, term(k, nu));
                    if (term(i, nu) <= lowest + 1e-10 * (1.0 + std::abs(lowest)) && nu > 0.0 && nu < nu_end)
                        kinks.push_back(nu);
                }
                a = b;
                fa = fb;
            }
        }
    }
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
    return kinks;
}

namespace geometry_detail {

inline void require_positive(const Segment& seg)
{
    if (!seg.stays_positive())
        throw Error(ErrorCode::SegmentLeavesOmega1,
                    "segment leaves Omega1: phi_1(s0) has a nonpositive component, growth integrand unbounded");
}

inline std::vector<double> breakpoints(const Segment& seg, double nu_end, bool split_kinks)
{
    std::vector<double> b{0.0};
    if (split_kinks)
        for (double k : liebig_kinks(seg, nu_end))
            b.push_back(k);
    b.push_back(nu_end);
    return b;
}

} // namespace geometry_detail

/// y1 (s0_1 - s1_bar) * integral_0^nu_end (1 - D/F(phi_tau)) dtau.
inline double partial_growth(const Segment& seg, double nu_end, const QuadratureSettings& q = {},
                             bool split_kinks = true)
{
    if (!(nu_end >= 0.0 && nu_end <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "partial_growth requires nu in [0,1]");
    if (seg.length() == 0.0 || nu_end == 0.0)
        return 0.0;
    geometry_detail::require_positive(seg);
    const double D = seg.config().D;
    const auto breaks = geometry_detail::breakpoints(seg, nu_end, split_kinks);
    const auto res = integrate([&](double nu) { return 1.0 - D / seg.rate(nu); }, breaks, q);
    return seg.length() * res.value;
}

/// I(s0), the net biomass change from s0 until the first impulse.
inline double growth_integral(const Segment& seg, const QuadratureSettings& q = {})
{
    return partial_growth(seg, 1.0, q, true);
}

inline double u_nu(const Segment& seg, double x0, double nu, const QuadratureSettings& q = {})
{
    if (!(x0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "u_nu requires x0 > 0");
    return x0 + partial_growth(seg, nu, q, true);
}

/// Time from s0 to the threshold starting with biomass x0.
inline double cycle_time(const Segment& seg, double x0, const QuadratureSettings& q = {})
{
    if (!(x0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "cycle_time requires x0 > 0");
    if (seg.length() == 0.0)
        return 0.0;
    geometry_detail::require_positive(seg);
    // u_nu is concave in nu, so its minimum on [0,1] is at an endpoint.
    const double x_end = x0 + growth_integral(seg, q);
    if (!(x_end > 0.0))
        throw Error(ErrorCode::OrbitDiesBeforeImpulse,
                    "orbit dies before impulse: u_1 = " + std::to_string(x_end) + " <= 0");

    const QuadratureSettings inner{q.abs_tol * 1e-2, q.rel_tol * 1e-2, q.max_subdivisions};
    const double D = seg.config().D;
    const auto kinks = liebig_kinks(seg, 1.0);
    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), kinks.begin(), kinks.end());
    breaks.push_back(1.0);

    // u_nu is built up from the closest breakpoint below nu so the inner
    // integral never straddles a kink.
    std::vector<double> u_at(breaks.size(), x0);
    for (std::size_t k = 1; k < breaks.size(); ++k)
        u_at[k] = u_at[k - 1] + seg.length() * integrate([&](double nu) { return 1.0 - D / seg.rate(nu); },
                                                         breaks[k - 1], breaks[k], inner)
                                                   .value;
    auto u_of = [&](double nu) {
        auto it = std::upper_bound(breaks.begin(), breaks.end(), nu);
        std::size_t k = static_cast<std::size_t>(std::distance(breaks.begin(), it));
        k = k == 0 ? 0 : k - 1;
        k = std::min(k, breaks.size() - 1);
        if (nu == breaks[k])
            return u_at[k];
        return u_at[k] + seg.length() * integrate([&](double tau) { return 1.0 - D / seg.rate(tau); },
                                                  breaks[k], nu, inner)
                                            .value;
    };
    const auto res = integrate([&](double nu) { return 1.0 / (seg.rate(nu) * u_of(nu)); }, breaks, q);
    return seg.length() * res.value;
}

/// Net biomass change over the limiting segment starting at s_hat_plus(r).
inline double mu_of_r(const ReactorConfig& cfg, double r, const QuadratureSettings& q = {})
{
    if (!(r >= 0.0 && r <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "mu_of_r requires r in [0,1]");
    if (region_of(cfg, cfg.s_in).region != Region::Omega1)
        throw Error(ErrorCode::NotInOmega1, "mu(r) requires s_in in Omega1");
    if (r == 0.0)
        return 0.0;
    return growth_integral(Segment(cfg, s_hat_plus(cfg, r)), q);
}

inline double mu_of_r(const ReactorConfig& cfg, const QuadratureSettings& q = {})
{
    return mu_of_r(cfg, cfg.r, q);
}

} // namespace scf
