#include <gtest/gtest.h>

#include "oracle.hpp"
#include "scf/classification.hpp"
#include "scf/fixtures.hpp"
#include "scf/simulator.hpp"

using namespace scf;

namespace {

// Coarse but still far below the compared tolerances, keeps the suite quick.
const oracle::OracleSettings fast{1000, 1000000};

} // namespace

TEST(Oracle, RejectsCrudeSettings)
{
    EXPECT_THROW((void)oracle::oracle_growth_integral(fixtures::ex3(), fixtures::ex3().s_in, {999, 1000000}),
                 std::invalid_argument);
    EXPECT_THROW((void)oracle::oracle_growth_integral(fixtures::ex3(), fixtures::ex3().s_in, {1000, 10}),
                 std::invalid_argument);
}

TEST(Oracle, UptakeAgreesWithLibrary)
{
    for (const auto& c : {fixtures::ex1(), fixtures::ex2(), fixtures::ex3()}) {
        const Vec s{0.4, 0.05, 0.7};
        EXPECT_NEAR(oracle::uptake(c, s.data()), eval_F(c, s), 1e-15);
    }
}

TEST(Oracle, ZeroLengthSegment)
{
    const auto c = fixtures::ex3();
    EXPECT_EQ(oracle::oracle_growth_integral(c, {c.s1_bar, 0.05, 0.4}, fast), 0.0);
}

TEST(Oracle, MuMatchesQuadrature)
{
    const auto c3 = fixtures::ex3();
    const double o3 = oracle::oracle_growth_integral(c3, s_hat_plus(c3), fast);
    EXPECT_NEAR(o3, mu_of_r(c3), 1e-6);
    EXPECT_NEAR(o3, 0.0037, 5e-4);

    const auto c2 = fixtures::ex2();
    const double o2 = oracle::oracle_growth_integral(c2, s_hat_plus(c2), fast);
    EXPECT_NEAR(o2, mu_of_r(c2), 1e-5);
    EXPECT_NEAR(o2, -0.2924, 1e-3);
}

TEST(Oracle, ConvergingRunMatchesSimulator)
{
    const auto c = fixtures::ex3();
    const Vec s0{0.3, 0.01, 1.0};
    const auto main = run(c, s0, 0.31);
    const auto ref = oracle::oracle_run(c, s0, 0.31, fast, static_cast<int>(main.cycles.size()));
    ASSERT_EQ(ref.cycles.size(), main.cycles.size());
    for (std::size_t k = 0; k < ref.cycles.size(); ++k) {
        EXPECT_NEAR(ref.cycles[k].x_plus / main.cycles[k].state_plus.x, 1.0, 1e-4) << k;
        EXPECT_NEAR(ref.cycles[k].t_minus / main.cycles[k].t_minus, 1.0, 1e-4) << k;
    }
}

TEST(Oracle, Ex1ImpulseCount)
{
    const auto c = fixtures::ex1();
    const Vec s0{0.6, 0.7, 0.8};
    const auto main = run(c, s0, 0.5);
    const auto ref = oracle::oracle_run(c, s0, 0.5, fast);
    EXPECT_TRUE(ref.washed_out);
    EXPECT_EQ(main.outcome.kind, OutcomeKind::Washout);
    EXPECT_EQ(ref.cycles.size(), main.cycles.size());
}

TEST(Oracle, BelowWashoutThreshold)
{
    const auto c = fixtures::ex3();
    const Vec s0{0.3, 0.01, 1.0};
    const auto main = run(c, s0, 5e-13);
    const auto ref = oracle::oracle_run(c, s0, 5e-13, fast);
    EXPECT_TRUE(ref.washed_out);
    EXPECT_TRUE(ref.cycles.empty());
    EXPECT_EQ(main.outcome.kind, OutcomeKind::Washout);
    EXPECT_TRUE(main.cycles.empty());
}
