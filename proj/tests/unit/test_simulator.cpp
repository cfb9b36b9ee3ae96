#include <gtest/gtest.h>

#include <sstream>

#include "scf/classification.hpp"
#include "scf/fixtures.hpp"
#include "scf/simulator.hpp"

using namespace scf;

namespace {

const Vec ex3_s0{0.3, 0.01, 1.0};

const RunResult& ex3_converging()
{
    static const RunResult r = run(fixtures::ex3(), ex3_s0, 0.31);
    return r;
}

CycleRecord record(int k, double duration, double x_plus)
{
    CycleRecord c;
    c.k = k;
    c.duration = duration;
    c.state_plus.x = x_plus;
    return c;
}

} // namespace

TEST(IntegrateFlow, ImmediateWashout)
{
    const auto c = fixtures::ex3();
    const IntegratorSettings st;
    ASSERT_LT(eval_F(c, ex3_s0), c.D);
    const auto f = integrate_flow(c, State{ex3_s0, st.washout_x / 2, 0.0}, st);
    EXPECT_EQ(f.stop, FlowStop::Washout);
    for (std::size_t i = 0; i < c.n; ++i)
        EXPECT_NEAR(f.end.s[i], ex3_s0[i], st.rel_tol * ex3_s0[i]);
}

TEST(IntegrateFlow, PeriodicSegmentEndsOnTheFixedPoint)
{
    const auto c = fixtures::ex3();
    const double mu = mu_of_r(c);
    const Vec start = s_hat_plus(c);
    const auto f = integrate_flow(c, State{start, (1 - c.r) * mu / c.r, 0.0});
    ASSERT_EQ(f.stop, FlowStop::Event);
    const Vec target = phi_nu(Segment(c, start), 1.0);
    for (std::size_t i = 0; i < c.n; ++i)
        EXPECT_NEAR(f.end.s[i], target[i], 1e-6);
    EXPECT_NEAR(f.end.x, mu / c.r, 1e-6);
    EXPECT_LT(std::abs(f.end.s[0] - c.s1_bar), default_event_tol);
}

TEST(IntegrateFlow, Ex1WashesOutAboveTheThreshold)
{
    const auto c = fixtures::ex1();
    const auto res = run(c, Vec{0.6, 0.7, 0.8}, 0.5);
    ASSERT_EQ(res.outcome.kind, OutcomeKind::Washout);
    const State last = res.cycles.empty() ? State{{0.6, 0.7, 0.8}, 0.5, 0.0} : res.cycles.back().state_plus;
    const auto f = integrate_flow(c, last);
    EXPECT_EQ(f.stop, FlowStop::Washout);
    EXPECT_LT(f.end.x, IntegratorSettings{}.washout_x);
    EXPECT_GT(f.end.s[0], c.s1_bar);
}

TEST(IntegrateFlow, RejectsBoundaryStarts)
{
    const auto c = fixtures::ex3();
    EXPECT_THROW((void)integrate_flow(c, State{{0.3, 0.0, 1.0}, 0.1, 0.0}), Error);
    EXPECT_THROW((void)integrate_flow(c, State{ex3_s0, 0.0, 0.0}), Error);
    EXPECT_THROW((void)integrate_flow(c, State{{0.3, 0.01}, 0.1, 0.0}), Error);
}

TEST(IntegrateFlow, TinyBiomassWithGrowthKeepsGoing)
{
    const auto c = fixtures::ex3();
    const IntegratorSettings st;
    ASSERT_GT(eval_F(c, c.s_in), c.D);
    const auto f = integrate_flow(c, State{c.s_in, st.washout_x / 2, 0.0}, st);
    EXPECT_EQ(f.stop, FlowStop::Event);
}

TEST(Run, Ex3Converges)
{
    const auto c = fixtures::ex3();
    const auto& res = ex3_converging();
    ASSERT_EQ(res.outcome.kind, OutcomeKind::ConvergedToPeriodic);
    EXPECT_LE(res.outcome.cycles_completed, 60);
    const double mu = mu_of_r(c);
    EXPECT_NEAR(*res.outcome.limit_x_post, 0.00863, 1e-4);
    EXPECT_NEAR(res.cycles.back().state_minus.x / (mu / c.r), 1.0, 1e-5);
    EXPECT_NEAR(mu / c.r, 0.01233, 2e-4);
}

TEST(Run, Ex3WashesOutBelowThreshold)
{
    const auto res = run(fixtures::ex3(), ex3_s0, 0.29);
    EXPECT_EQ(res.outcome.kind, OutcomeKind::Washout);
    EXPECT_LE(res.cycles.size(), 4u);
}

TEST(Run, Ex2FinitelyManyImpulses)
{
    const auto c = fixtures::ex2();
    for (double x0 : {0.05, 0.5, 2.0}) {
        const auto res = run(c, c.s_in, x0);
        EXPECT_EQ(res.outcome.kind, OutcomeKind::Washout) << "x0 = " << x0;
        EXPECT_LT(res.cycles.size(), 50u);
    }
}

TEST(Run, RejectsBadInputs)
{
    const auto c = fixtures::ex3();
    EXPECT_THROW((void)run(c, Vec{0.25, 0.01, 1.0}, 0.3), Error);
    EXPECT_THROW((void)run(c, ex3_s0, -1.0), Error);
    auto bad = c;
    bad.r = 2.0;
    EXPECT_THROW((void)run(bad, ex3_s0, 0.3), Error);
}

TEST(Run, PositivityAndBoundedness)
{
    const auto c = fixtures::ex3();
    const auto& res = ex3_converging();
    double x_first = 0.0;
    for (std::size_t k = 0; k < res.cycles.size(); ++k) {
        const auto& cy = res.cycles[k];
        if (k < 3)
            x_first = std::max(x_first, cy.state_minus.x);
        for (const State* s : {&cy.state_minus, &cy.state_plus}) {
            EXPECT_GT(s->x, 0.0);
            for (std::size_t i = 0; i < c.n; ++i) {
                EXPECT_GT(s->s[i], 0.0);
                EXPECT_LE(s->s[i], std::max(c.s_in[i], ex3_s0[i]) + 1e-9);
            }
        }
    }
    for (const auto& cy : res.cycles)
        EXPECT_LE(cy.state_minus.x, 10.0 * x_first);
}

TEST(Run, ResourcesDecreaseWithinEachCycle)
{
    const auto c = fixtures::ex3();
    const auto& traj = ex3_converging().trajectory;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (traj[i].phase != Phase::Flow || traj[i].state.t == traj[i - 1].state.t)
            continue;
        for (std::size_t j = 0; j < c.n; ++j)
            EXPECT_LT(traj[i].state.s[j], traj[i - 1].state.s[j]);
    }
}

TEST(Run, RecordsAreConsistent)
{
    const auto c = fixtures::ex3();
    const auto& res = ex3_converging();
    for (const auto& cy : res.cycles) {
        EXPECT_LT(std::abs(cy.state_minus.s[0] - c.s1_bar), default_event_tol);
        const State g = impulse_map(c, cy.state_minus);
        EXPECT_EQ(g.s, cy.state_plus.s);
        EXPECT_EQ(g.x, cy.state_plus.x);
        EXPECT_GT(cy.duration, 0.0);
    }
}

TEST(Run, DurationsMatchCycleTimeIntegral)
{
    const auto c = fixtures::ex3();
    const auto& res = ex3_converging();
    State start{ex3_s0, 0.31, 0.0};
    for (const auto& cy : res.cycles) {
        const double T = cycle_time(Segment(c, start.s), start.x);
        EXPECT_NEAR(cy.duration / T, 1.0, 1e-5) << "cycle " << cy.k;
        start = cy.state_plus;
    }
}

TEST(Run, LyapunovLaws)
{
    const auto c = fixtures::ex3();
    const auto& res = ex3_converging();
    const auto& traj = res.trajectory;
    Vec arc_start = lyapunov_v(c, traj.front().state.s).v;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const Vec v = lyapunov_v(c, traj[i].state.s).v;
        if (traj[i].phase == Phase::Impulse) {
            const Vec pre = lyapunov_v(c, traj[i - 1].state.s).v;
            for (std::size_t j = 0; j < c.n; ++j)
                EXPECT_NEAR(v[j], (1 - c.r) * pre[j], 1e-15);
            arc_start = v;
            continue;
        }
        for (std::size_t j = 0; j < c.n; ++j)
            EXPECT_NEAR(v[j], arc_start[j], 1e-8);
    }
}

TEST(DetectOutcome, ConvergedWindow)
{
    const OrbitReference ref{0.0037, 0.0086, 31.0};
    const IntegratorSettings st;
    std::vector<CycleRecord> h{record(1, 30, 0.0086), record(2, 30, 0.0086)};
    EXPECT_FALSE(detect_outcome(h, ref, st).has_value());
    h.push_back(record(3, 30, 0.0086));
    const auto o = detect_outcome(h, ref, st);
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(o->kind, OutcomeKind::ConvergedToPeriodic);
    EXPECT_EQ(o->cycles_completed, 3);
}

TEST(DetectOutcome, GeometricDurationsStall)
{
    const OrbitReference ref{-1e-12, std::nullopt, std::nullopt};
    const IntegratorSettings st;
    std::vector<CycleRecord> h;
    std::optional<RunOutcome> o;
    double d = 1.0;
    int k = 0;
    while (!o && k < 20) {
        h.push_back(record(++k, d, 0.1));
        d *= 2;
        o = detect_outcome(h, ref, st);
    }
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(o->kind, OutcomeKind::StalledCycleTime);
    EXPECT_GT(h.back().duration, st.stall_growth_factor * h.front().duration);
    EXPECT_EQ(k, 5);
}

TEST(DetectOutcome, LongCycleAgainstPeriodicTime)
{
    const OrbitReference ref{0.0037, 0.0086, 31.0};
    const IntegratorSettings st;
    std::vector<CycleRecord> h{record(1, 31.0 * 25, 0.5)};
    const auto o = detect_outcome(h, ref, st);
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(o->kind, OutcomeKind::StalledCycleTime);
}

TEST(DetectOutcome, ContinuesUntilTheWindowIsMet)
{
    const auto& res = ex3_converging();
    const auto ref = orbit_reference(fixtures::ex3());
    const IntegratorSettings st;
    for (std::size_t m = 1; m < res.cycles.size(); ++m)
        EXPECT_FALSE(detect_outcome(std::span(res.cycles).first(m), ref, st).has_value()) << m;
    const auto o = detect_outcome(res.cycles, fixtures::ex3(), st);
    ASSERT_TRUE(o.has_value());
    EXPECT_EQ(o->kind, OutcomeKind::ConvergedToPeriodic);
}

TEST(Csv, Headers)
{
    const auto c = fixtures::ex3();
    const auto res = run(c, ex3_s0, 0.29);
    std::ostringstream t, k;
    write_trajectory_csv(t, c, res.trajectory);
    write_cycles_csv(k, c, res.cycles);
    EXPECT_EQ(t.str().substr(0, t.str().find('\n')), "t,s1,s2,s3,x,phase");
    EXPECT_EQ(k.str().substr(0, k.str().find('\n')),
              "k,t_minus,duration,s1_minus,s2_minus,s3_minus,x_minus,s1_plus,s2_plus,s3_plus,x_plus");
    EXPECT_NE(t.str().find(",impulse\n"), std::string::npos);
    const std::string rows = k.str();
    EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), static_cast<long>(res.cycles.size()) + 1);
}

TEST(IntegrateFlow, GrowthAcrossALimitingSwitchMatchesQuadrature)
{
    const auto c = fixtures::ex3();
    const Vec s0{0.5, 0.2, 0.21};
    const Segment seg(c, s0);
    ASSERT_FALSE(liebig_kinks(seg).empty());
    const auto f = integrate_flow(c, State{s0, 0.5, 0.0});
    ASSERT_EQ(f.stop, FlowStop::Event);
    const double I = growth_integral(seg);
    EXPECT_NEAR((f.end.x - 0.5) / I, 1.0, 1e-8);
}
