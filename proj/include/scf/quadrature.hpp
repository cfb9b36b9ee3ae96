#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature.
//
// Intervals are kept in a max-heap keyed on their error estimate; the worst
// one is bisected until the summed estimate meets max(abs_tol, rel_tol*|I|).
// Ties are broken on the left endpoint so the subdivision order is fully
// deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "scf/error.hpp"

namespace scf {

struct QuadratureSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    int evaluations = 0;
};

namespace quad_detail {

inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};

inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights at xgk[1], xgk[3], xgk[5], xgk[7].
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
};

struct WorseFirst {
    bool operator()(const Panel& l, const Panel& r) const
    {
        if (l.error != r.error)
            return l.error < r.error;
        return l.a > r.a;
    }
};

template <class Fn>
Panel gk15(Fn& f, double a, double b, int& evals)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, 15> fv;
    fv[14] = f(c);
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[j];
        fv[2 * j] = f(c - dx);
        fv[2 * j + 1] = f(c + dx);
    }
    evals += 15;
    double kron = wgk[7] * fv[14];
    double gauss = wg[3] * fv[14];
    double abs_sum = wgk[7] * std::abs(fv[14]);
    for (int j = 0; j < 7; ++j) {
        const double sum = fv[2 * j] + fv[2 * j + 1];
        kron += wgk[j] * sum;
        abs_sum += wgk[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
        if (j % 2 == 1)
            gauss += wg[j / 2] * sum;
    }
    const double mean = 0.5 * kron;
    double spread = wgk[7] * std::abs(fv[14] - mean);
    for (int j = 0; j < 7; ++j)
        spread += wgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));

    const double value = kron * h;
    double error = std::abs((kron - gauss) * h);
    spread *= std::abs(h);
    // QUADPACK scaling of the raw Gauss-Kronrod difference.
    if (spread != 0.0 && error != 0.0)
        error = spread * std::min(1.0, std::pow(200.0 * error / spread, 1.5));
    const double floor = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * std::abs(h);
    if (floor > std::numeric_limits<double>::min() / (50.0 * std::numeric_limits<double>::epsilon()))
        error = std::max(error, floor);
    if (!std::isfinite(value) || !std::isfinite(error))
        throw Error(ErrorCode::NonFiniteState, "quadrature integrand is not finite on [" + std::to_string(a) +
                                                   ", " + std::to_string(b) + "]");
    return {a, b, value, error};
}

} // namespace quad_detail

/// Integrates f over the panels delimited by `breaks` (sorted ascending, at
/// least two entries). Interior breakpoints are never straddled by a rule.
template <class Fn>
QuadratureResult integrate(Fn&& f, std::span<const double> breaks, const QuadratureSettings& q = {})
{
    using namespace quad_detail;
    if (breaks.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "integrate needs at least two breakpoints");
    if (!(q.abs_tol > 0.0) || !(q.rel_tol > 0.0) || q.max_subdivisions < 1)
        throw Error(ErrorCode::InvalidArgument, "quadrature tolerances must be positive");

    QuadratureResult res;
    std::priority_queue<Panel, std::vector<Panel>, WorseFirst> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] < breaks[i])
            throw Error(ErrorCode::InvalidArgument, "breakpoints must be ascending");
        if (breaks[i + 1] == breaks[i])
            continue;
        Panel p = gk15(f, breaks[i], breaks[i + 1], res.evaluations);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    auto tolerance = [&] { return std::max(q.abs_tol, q.rel_tol * std::abs(total)); };
    while (!heap.empty() && total_err > tolerance()) {
        if (res.subdivisions >= q.max_subdivisions)
            throw Error(ErrorCode::QuadratureBudgetExhausted,
                        "error estimate " + std::to_string(total_err) + " above tolerance after " +
                            std::to_string(res.subdivisions) + " subdivisions");
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw Error(ErrorCode::QuadratureBudgetExhausted, "interval width reached machine resolution");
        Panel left = gk15(f, worst.a, mid, res.evaluations);
        Panel right = gk15(f, mid, worst.b, res.evaluations);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++res.subdivisions;
    }

    // Re-sum from the panels to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    std::vector<Panel> panels;
    panels.reserve(heap.size());
    while (!heap.empty()) {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
    for (const auto& p : panels) {
        total += p.value;
        total_err += p.error;
    }
    res.value = total;
    res.error = total_err;
    return res;
}

template <class Fn>
QuadratureResult integrate(Fn&& f, double a, double b, const QuadratureSettings& q = {})
{
    const std::array<double, 2> breaks{a, b};
    return integrate(std::forward<Fn>(f), std::span<const double>(breaks), q);
}

} // namespace scf
