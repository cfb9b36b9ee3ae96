#pragma once

// Lyapunov-like signed distances and the Omega0 / Omega1 partition of the
// reachable resource space {s : s1 >= s1_bar}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "scf/core_model.hpp"

namespace scf {

/// V_i(s) = (s1_in - s1) y1 - (si_in - si) yi. Component 0 is identically 0.
struct LyapunovVector {
    Vec v;

    [[nodiscard]] double sup_norm() const
    {
        double m = 0.0;
        for (double a : v)
            m = std::max(m, std::abs(a));
        return m;
    }
};

enum class Region { Omega0, Omega1, BoundaryOmega1 };

constexpr std::string_view to_string(Region r) noexcept
{
    switch (r) {
    case Region::Omega0: return "Omega0";
    case Region::Omega1: return "Omega1";
    case Region::BoundaryOmega1: return "BoundaryOmega1";
    }
    return "unknown";
}

struct RegionVerdict {
    Region region = Region::Omega1;
    std::size_t index = 0; // 0-based resource index of the witness
    double value = 0.0;    // V_index(s)
    double vbar = 0.0;     // Vbar_index
};

inline constexpr double boundary_rel_tol = 1e-12;

inline LyapunovVector lyapunov_v(const ReactorConfig& cfg, std::span<const double> s)
{
    if (s.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch, "lyapunov_v expects " + std::to_string(cfg.n) + " entries");
    LyapunovVector out;
    out.v.assign(cfg.n, 0.0);
    const double head = (cfg.s_in[0] - s[0]) * cfg.yield(0);
    for (std::size_t i = 1; i < cfg.n; ++i)
        out.v[i] = head - (cfg.s_in[i] - s[i]) * cfg.yield(i);
    return out;
}

/// Vbar_i = y1 (s1_in - s1_bar) - yi si_in for i >= 2. Entry 0 is not part of
/// the partition and is reported as NaN.
inline Vec vbar(const ReactorConfig& cfg)
{
    Vec out(cfg.n, std::numeric_limits<double>::quiet_NaN());
    const double head = cfg.yield(0) * (cfg.s_in[0] - cfg.s1_bar);
    for (std::size_t i = 1; i < cfg.n; ++i)
        out[i] = head - cfg.yield(i) * cfg.s_in[i];
    return out;
}

inline RegionVerdict region_of(const ReactorConfig& cfg, std::span<const double> s)
{
    if (s.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch, "region_of expects " + std::to_string(cfg.n) + " entries");
    if (s[0] < cfg.s1_bar - default_event_tol)
        throw Error(ErrorCode::InvalidArgument, "region_of requires s1 >= s1_bar");

    const LyapunovVector V = lyapunov_v(cfg, s);
    const Vec vb = vbar(cfg);
    double scale = 0.0;
    for (std::size_t i = 1; i < cfg.n; ++i)
        scale = std::max(scale, std::abs(vb[i]));
    const double tol = boundary_rel_tol * std::max(scale, std::numeric_limits<double>::min());

    RegionVerdict out;
    if (cfg.n == 1)
        return out;

    // Witness is the coordinate with the smallest margin V_i - Vbar_i.
    std::size_t worst = 1;
    for (std::size_t i = 2; i < cfg.n; ++i)
        if (V.v[i] - vb[i] < V.v[worst] - vb[worst])
            worst = i;
    const double margin = V.v[worst] - vb[worst];
    out.index = worst;
    out.value = V.v[worst];
    out.vbar = vb[worst];
    if (margin < -tol)
        out.region = Region::Omega0;
    else if (margin <= tol)
        out.region = Region::BoundaryOmega1;
    else
        out.region = Region::Omega1;
    return out;
}

/// sigma = min_{i>=2} (-Vbar_i); +inf for a single resource.
inline double sigma(const ReactorConfig& cfg)
{
    if (region_of(cfg, cfg.s_in).region != Region::Omega1)
        throw Error(ErrorCode::NotInOmega1, "sigma requires s_in in Omega1");
    const Vec vb = vbar(cfg);
    double out = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < cfg.n; ++i)
        out = std::min(out, -vb[i]);
    return out;
}

/// Index j >= 2 maximizing Vbar_j, the projection plane used for plots.
inline std::size_t projection_index(const ReactorConfig& cfg)
{
    if (cfg.n < 2)
        return 0;
    const Vec vb = vbar(cfg);
    std::size_t j = 1;
    for (std::size_t i = 2; i < cfg.n; ++i)
        if (vb[i] > vb[j])
            j = i;
    return j;
}

} // namespace scf
