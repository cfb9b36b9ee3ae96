#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "scf/dopri5.hpp"
#include "scf/quadrature.hpp"
#include "scf/roots.hpp"

using namespace scf;

TEST(Quadrature, PolynomialsAreExact)
{
    const auto r = integrate([](double x) { return 3 * x * x - 2 * x + 1; }, 0.0, 2.0);
    EXPECT_NEAR(r.value, 8.0 - 4.0 + 2.0, 1e-13);
    EXPECT_EQ(r.subdivisions, 0);
}

TEST(Quadrature, SmoothIntegrand)
{
    const auto r = integrate([](double x) { return std::exp(-x) * std::sin(5 * x); }, 0.0, 10.0);
    const double exact = (5.0 - std::exp(-10.0) * (std::sin(50.0) + 5 * std::cos(50.0))) / 26.0;
    EXPECT_NEAR(r.value, exact, 1e-10);
    EXPECT_LE(r.error, 1e-8);
}

TEST(Quadrature, KinkIsResolvedAndBreakpointsHelp)
{
    auto f = [](double x) { return std::abs(x - 1.0 / 3.0); };
    const double exact = (1.0 / 9.0 + 4.0 / 9.0) / 2.0;
    const auto plain = integrate(f, 0.0, 1.0);
    const std::array<double, 3> b{0.0, 1.0 / 3.0, 1.0};
    const auto split = integrate(f, std::span<const double>(b));
    EXPECT_NEAR(plain.value, exact, 1e-10);
    EXPECT_NEAR(split.value, exact, 1e-14);
    EXPECT_LT(split.evaluations, plain.evaluations);
}

TEST(Quadrature, BudgetExhaustion)
{
    QuadratureSettings q;
    q.max_subdivisions = 3;
    try {
        (void)integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::QuadratureBudgetExhausted);
    }
}

TEST(Quadrature, Deterministic)
{
    auto f = [](double x) { return 1.0 / (1e-3 + x * x); };
    const auto a = integrate(f, -1.0, 1.0);
    const auto b = integrate(f, -1.0, 1.0);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.evaluations, b.evaluations);
    EXPECT_NEAR(a.value, 2.0 * std::atan(1.0 / std::sqrt(1e-3)) / std::sqrt(1e-3), 1e-7);
}

TEST(Quadrature, RejectsBadArguments)
{
    EXPECT_THROW((void)integrate([](double) { return 1.0; }, std::span<const double>()), Error);
    QuadratureSettings q;
    q.abs_tol = 0.0;
    EXPECT_THROW((void)integrate([](double) { return 1.0; }, 0.0, 1.0, q), Error);
    EXPECT_THROW((void)integrate([](double) { return NAN; }, 0.0, 1.0), Error);
}

TEST(Roots, SimpleCrossing)
{
    const auto r = bracketed_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    EXPECT_NEAR(r.root, std::numbers::sqrt2, 1e-12);
    EXPECT_LT(r.iterations, 30);
}

TEST(Roots, DiscontinuousSignChange)
{
    const auto r = bracketed_root([](double x) { return x < 0.3 ? -1.0 : 1.0; }, 0.0, 1.0, 1e-10);
    EXPECT_NEAR(r.root, 0.3, 1e-10);
    EXPECT_LE(r.hi - r.lo, 1e-10);
}

TEST(Roots, EndpointRootAndBadBracket)
{
    EXPECT_EQ(bracketed_root([](double x) { return x; }, 0.0, 1.0).root, 0.0);
    EXPECT_THROW((void)bracketed_root([](double x) { return x * x + 1; }, -1.0, 1.0), Error);
}

TEST(Roots, PredicateBisection)
{
    const auto [lo, hi] = bisect_predicate([](double x) { return x * x < 0.5; }, 0.0, 1.0, 1e-9);
    EXPECT_LT(lo * lo, 0.5);
    EXPECT_GE(hi * hi, 0.5);
    EXPECT_LE(hi - lo, 1e-9);
}

namespace {

StepControl tolerances(double rel, double abs)
{
    StepControl c;
    c.rel_tol = rel;
    c.abs_tol = abs;
    return c;
}

struct Oscillator {
    void operator()(double, const std::vector<double>& y, std::vector<double>& dy) const
    {
        dy[0] = y[1];
        dy[1] = -y[0];
    }
};

} // namespace

TEST(DormandPrince, HarmonicOscillator)
{
    DormandPrince<Oscillator> dp(Oscillator{}, 0.0, {1.0, 0.0}, tolerances(1e-10, 1e-12));
    const double T = 2.0 * std::numbers::pi;
    while (dp.t() < T)
        dp.step(T);
    EXPECT_EQ(dp.t(), T);
    EXPECT_NEAR(dp.y()[0], 1.0, 1e-8);
    EXPECT_NEAR(dp.y()[1], 0.0, 1e-8);
    EXPECT_GT(dp.accepted(), 10u);
}

TEST(DormandPrince, DenseOutputInterpolates)
{
    DormandPrince<Oscillator> dp(Oscillator{}, 0.0, {1.0, 0.0}, tolerances(1e-10, 1e-12));
    for (int i = 0; i < 20; ++i) {
        dp.step(100.0);
        for (double th : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            const double t = dp.t_prev() + th * (dp.t() - dp.t_prev());
            EXPECT_NEAR(dp.dense_component(0, t), std::cos(t), 1e-8);
            EXPECT_NEAR(dp.dense(t)[1], -std::sin(t), 1e-8);
        }
    }
}

TEST(DormandPrince, ExponentialDecayRelativeAccuracy)
{
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) { dy[0] = -0.5 * y[0]; };
    StepControl ctl = tolerances(1e-9, 1e-11);
    ctl.component_abs_tol = {1e-30};
    DormandPrince<decltype(rhs)> dp(rhs, 0.0, {1.0}, ctl);
    while (dp.t() < 60.0)
        dp.step(60.0);
    EXPECT_NEAR(dp.y()[0] / std::exp(-30.0), 1.0, 1e-6);
}

TEST(DormandPrince, NonFiniteStateThrows)
{
    auto rhs = [](double, const std::vector<double>& y, std::vector<double>& dy) { dy[0] = y[0] * y[0]; };
    DormandPrince<decltype(rhs)> dp(rhs, 0.0, {1.0}, tolerances(1e-8, 1e-10));
    EXPECT_THROW(
        {
            while (dp.t() < 2.0)
                dp.step(2.0);
        },
        Error);
}
