#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "scf/error.hpp"

namespace scf {

struct RootResult {
    double root = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int iterations = 0;
};

/// Zero of f on [lo, hi] given f(lo) and f(hi) of opposite sign.
///
/// Every iteration first tries a secant (false-position) point and then
/// bisects whatever bracket remains, so the bracket at least halves per
/// iteration while simple crossings converge superlinearly.
template <class Fn>
RootResult bracketed_root(Fn&& f, double lo, double hi, double x_tol = 1e-12, int max_iter = 200)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return {lo, lo, lo, 0};
    if (fhi == 0.0)
        return {hi, hi, hi, 0};
    if (std::signbit(flo) == std::signbit(fhi))
        throw Error(ErrorCode::InvalidArgument, "bracketed_root: f(lo) and f(hi) have the same sign");

    RootResult res{0.5 * (lo + hi), lo, hi, 0};
    auto shrink = [&](double x, double fx) {
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    };
    while (hi - lo > x_tol && res.iterations < max_iter) {
        ++res.iterations;
        const double secant = lo - flo * (hi - lo) / (fhi - flo);
        if (secant > lo && secant < hi) {
            const double fs = f(secant);
            if (fs == 0.0)
                return {secant, secant, secant, res.iterations};
            shrink(secant, fs);
        }
        if (hi - lo <= x_tol)
            break;
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0)
            return {mid, mid, mid, res.iterations};
        shrink(mid, fm);
    }
    res.lo = lo;
    res.hi = hi;
    res.root = std::abs(flo) < std::abs(fhi) ? lo : hi;
    return res;
}

/// Boundary of a predicate that holds at `lo` and fails at `hi`. Returns the
/// final bracket (pred(lo) true, pred(hi) false) of width <= tol.
template <class Pred>
std::pair<double, double> bisect_predicate(Pred&& pred, double lo, double hi, double tol, int max_iter = 200)
{
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi};
}

} // namespace scf
