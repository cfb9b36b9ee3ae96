#pragma once

// Time-domain simulation of the impulsive system: adaptive flow integration
// between decants, event-located impulses, and run-outcome detection.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scf/config_io.hpp"
#include "scf/core_model.hpp"
#include "scf/dopri5.hpp"
#include "scf/orbit_geometry.hpp"
#include "scf/regions.hpp"
#include "scf/roots.hpp"

namespace scf {

struct IntegratorSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double event_tol = default_event_tol;
    int max_cycles = 200;
    double t_max = 1e6;
    double washout_x = 1e-12;
    double converge_tol = 1e-6;
    int converge_window = 3;
    /// Stall when a cycle outlasts this multiple of the periodic cycle time.
    double stall_factor = 20.0;
    /// With mu <= 0, stall when growing durations exceed this multiple of the first.
    double stall_growth_factor = 10.0;
};

struct CycleRecord {
    int k = 0;
    double t_minus = 0.0;
    State state_minus;
    State state_plus;
    double duration = 0.0;
    double x_growth = 0.0; // x(t_k^-) minus the biomass at the start of the cycle
};

enum class OutcomeKind { ConvergedToPeriodic, Washout, StalledCycleTime, BudgetExhausted };

constexpr std::string_view to_string(OutcomeKind k) noexcept
{
    switch (k) {
    case OutcomeKind::ConvergedToPeriodic: return "ConvergedToPeriodic";
    case OutcomeKind::Washout: return "Washout";
    case OutcomeKind::StalledCycleTime: return "StalledCycleTime";
    case OutcomeKind::BudgetExhausted: return "BudgetExhausted";
    }
    return "unknown";
}

struct RunOutcome {
    OutcomeKind kind = OutcomeKind::BudgetExhausted;
    int cycles_completed = 0;
    State final_state;
    std::optional<double> limit_x_post;
};

/// Periodic-orbit data the outcome detector compares against. `mu` is empty
/// when s_in is not in Omega1.
struct OrbitReference {
    std::optional<double> mu;
    std::optional<double> x_post;
    std::optional<double> cycle_time;
};

inline OrbitReference orbit_reference(const ReactorConfig& cfg, const QuadratureSettings& q = {})
{
    OrbitReference ref;
    if (region_of(cfg, cfg.s_in).region != Region::Omega1)
        return ref;
    ref.mu = mu_of_r(cfg, q);
    if (*ref.mu > 0.0) {
        ref.x_post = (1.0 - cfg.r) * *ref.mu / cfg.r;
        ref.cycle_time = cycle_time(Segment(cfg, s_hat_plus(cfg)), *ref.x_post, q);
    }
    return ref;
}

// ---------------------------------------------------------------------------
// flow

enum class FlowStop { Event, Washout, Horizon };

struct FlowResult {
    State end;
    FlowStop stop = FlowStop::Horizon;
    std::vector<State> samples; // accepted step end points, excluding the start
};

namespace sim_detail {

inline std::vector<double> pack(const State& s)
{
    std::vector<double> y(s.s);
    y.push_back(s.x);
    return y;
}

inline State unpack(const std::vector<double>& y, double t)
{
    State s;
    s.s.assign(y.begin(), y.end() - 1);
    s.x = y.back();
    s.t = t;
    return s;
}

} // namespace sim_detail

inline FlowResult integrate_flow(const ReactorConfig& cfg, const State& from, const IntegratorSettings& settings = {})
{
    using sim_detail::pack;
    using sim_detail::unpack;
    if (from.s.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch, "integrate_flow state has wrong dimension");
    for (double v : from.s)
        if (!(v > 0.0))
            throw Error(ErrorCode::InvalidArgument, "integrate_flow requires an interior state");
    if (!(from.x > 0.0))
        throw Error(ErrorCode::InvalidArgument, "integrate_flow requires x > 0");

    FlowResult out;
    auto washed_out = [&](std::span<const double> s, double x) {
        return x < settings.washout_x && uptake_rate(cfg.uptake, s) < cfg.D;
    };
    if (washed_out(from.s, from.x)) {
        out.end = from;
        out.stop = FlowStop::Washout;
        return out;
    }

    const std::size_t n = cfg.n;
    auto rhs = [&cfg, n](double, const std::vector<double>& y, std::vector<double>& dy) {
        const double F = uptake_rate(cfg.uptake, std::span<const double>(y.data(), n));
        const double x = y[n];
        for (std::size_t i = 0; i < n; ++i)
            dy[i] = -cfg.Y[i] * F * x;
        dy[n] = (F - cfg.D) * x;
    };
    StepControl ctl;
    ctl.rel_tol = settings.rel_tol;
    ctl.abs_tol = settings.abs_tol;
    // Biomass is resolved well below the washout threshold so that decay
    // toward washout is tracked rather than lost in the absolute tolerance.
    ctl.component_abs_tol.assign(n + 1, settings.abs_tol);
    ctl.component_abs_tol[n] = std::min(settings.abs_tol, 1e-3 * settings.washout_x);
    using Solver = DormandPrince<decltype(rhs)>;
    std::optional<Solver> solver;
    solver.emplace(rhs, from.t, pack(from), ctl);

    // Genuine steps from (t0, y0) to t1; the dense interpolant is only fourth order.
    auto advance = [&](double t0, const std::vector<double>& y0, double t1) {
        Solver sub(rhs, t0, y0, ctl);
        while (sub.t() < t1)
            sub.step(t1);
        return sub.y();
    };
    const bool liebig = cfg.uptake.kind == UptakeKind::LiebigMin && n > 1;
    auto limiting = [&](const std::vector<double>& y) {
        return limiting_resource(cfg.uptake, std::span<const double>(y.data(), n));
    };

    const double s1_bar = cfg.s1_bar;
    if (!(from.s[0] > s1_bar))
        throw Error(ErrorCode::InvalidArgument, "integrate_flow requires s1 > s1_bar at the start");

    while (solver->t() < settings.t_max) {
        const double s1_before = solver->y()[0];
        const std::vector<double> y_before = solver->y();
        const double t_before = solver->t();
        solver->step(settings.t_max);
        const auto& y = solver->y();
        for (double v : y)
            if (!std::isfinite(v))
                throw Error(ErrorCode::NonFiniteState, "non-finite state at t = " + std::to_string(solver->t()));
        // Increases below the local error allowance are integration noise.
        if (y[0] > s1_before + 10.0 * (settings.abs_tol + settings.rel_tol * std::abs(s1_before)))
            throw Error(ErrorCode::UpwardCrossing, "s1 increased along the flow at t = " + std::to_string(solver->t()) +
                                                       " (x = " + format_number(y[n]) + ", ds1 = " + format_number(y[0] - s1_before) + ")");

        // A step across a switch of the limiting resource has a reduced-order
        // error the embedded estimate does not see: stop at the switch and
        // restart from there.
        if (liebig && limiting(y) != limiting(y_before)) {
            const std::size_t a0 = limiting(y_before);
            double lo = t_before, hi = solver->t();
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi))
                    break;
                if (limiting(solver->dense(mid)) == a0)
                    lo = mid;
                else
                    hi = mid;
            }
            const double min_gap = 1e-12 * std::max(1.0, std::abs(t_before));
            if (hi - t_before > min_gap && solver->t() - hi > min_gap && solver->dense_component(0, hi) > s1_bar) {
                const std::vector<double> y_switch = advance(t_before, y_before, hi);
                State at = unpack(y_switch, hi);
                out.samples.push_back(at);
                if (washed_out(at.s, at.x)) {
                    out.end = std::move(at);
                    out.stop = FlowStop::Washout;
                    return out;
                }
                solver.emplace(rhs, hi, y_switch, ctl);
                continue;
            }
        }

        if (y[0] <= s1_bar) {
            auto g = [&](double t) { return solver->dense_component(0, t) - s1_bar; };
            double lo = solver->t_prev(), hi = solver->t();
            double t_event = hi;
            // Bisection on the dense output until s1 is within event_tol.
            for (int it = 0; it < 200 && !(std::abs(g(t_event)) < 0.5 * settings.event_tol); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (!(mid > lo && mid < hi))
                    break;
                if (g(mid) > 0.0)
                    lo = mid;
                else
                    hi = mid;
                t_event = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
            }
            // Then genuine steps with Newton updates on t from ds1/dt = -Y1 F x.
            std::vector<double> y_event = solver->dense(t_event);
            for (int it = 0; it < 8; ++it) {
                y_event = advance(t_before, y_before, t_event);
                const double gap = y_event[0] - s1_bar;
                const double speed = cfg.Y[0] * uptake_rate(cfg.uptake, std::span<const double>(y_event.data(), n)) *
                                     y_event[n];
                if (std::abs(gap) < 0.5 * settings.event_tol || !(speed > 0.0))
                    break;
                t_event = std::max(t_before, t_event + gap / speed);
            }
            out.end = unpack(y_event, t_event);
            if (!(std::abs(out.end.s[0] - s1_bar) < settings.event_tol))
                throw Error(ErrorCode::NonFiniteState, "event location failed to reach event_tol");
            out.stop = FlowStop::Event;
            out.samples.push_back(out.end);
            return out;
        }

        State now = unpack(y, solver->t());
        out.samples.push_back(now);
        if (washed_out(now.s, now.x)) {
            out.end = std::move(now);
            out.stop = FlowStop::Washout;
            return out;
        }
    }
    out.end = unpack(solver->y(), solver->t());
    out.stop = FlowStop::Horizon;
    return out;
}

// ---------------------------------------------------------------------------
// outcome detection

/// Checks the cycle history for a terminal outcome; nullopt means keep going.
inline std::optional<RunOutcome> detect_outcome(std::span<const CycleRecord> history, const OrbitReference& ref,
                                                const IntegratorSettings& settings)
{
    if (history.empty())
        return std::nullopt;
    const CycleRecord& last = history.back();
    auto make = [&](OutcomeKind kind) {
        RunOutcome o;
        o.kind = kind;
        o.cycles_completed = static_cast<int>(history.size());
        o.final_state = last.state_plus;
        return o;
    };

    if (ref.mu && *ref.mu > 0.0 && ref.x_post) {
        const auto window = static_cast<std::size_t>(std::max(settings.converge_window, 1));
        if (history.size() >= window) {
            bool close = true;
            for (std::size_t i = history.size() - window; i < history.size(); ++i)
                close = close && std::abs(history[i].state_plus.x - *ref.x_post) / *ref.x_post < settings.converge_tol;
            if (close) {
                RunOutcome o = make(OutcomeKind::ConvergedToPeriodic);
                o.limit_x_post = last.state_plus.x;
                return o;
            }
        }
        if (ref.cycle_time && last.duration > settings.stall_factor * *ref.cycle_time)
            return make(OutcomeKind::StalledCycleTime);
    } else if (ref.mu && history.size() >= 3) {
        const std::size_t m = history.size();
        const bool growing = history[m - 1].duration > history[m - 2].duration &&
                             history[m - 2].duration > history[m - 3].duration;
        if (growing && last.duration > settings.stall_growth_factor * history.front().duration)
            return make(OutcomeKind::StalledCycleTime);
    }
    return std::nullopt;
}

inline std::optional<RunOutcome> detect_outcome(std::span<const CycleRecord> history, const ReactorConfig& cfg,
                                                const IntegratorSettings& settings)
{
    return detect_outcome(history, orbit_reference(cfg), settings);
}

// ---------------------------------------------------------------------------
// run

enum class Phase { Flow, Impulse };

struct TrajectoryPoint {
    State state;
    Phase phase = Phase::Flow;
};

struct RunResult {
    std::vector<CycleRecord> cycles;
    RunOutcome outcome;
    std::vector<TrajectoryPoint> trajectory;
};

inline RunResult run(const ReactorConfig& cfg, std::span<const double> s0, double x0,
                     const IntegratorSettings& settings = {}, const OrbitReference* reference = nullptr)
{
    if (auto v = validate_config(cfg); !v.empty())
        throw Error(ErrorCode::InvalidConfig, v.front().code + ": " + v.front().message);
    if (s0.size() != cfg.n)
        throw Error(ErrorCode::DimensionMismatch, "run: s0 has wrong dimension");
    if (!(s0[0] > cfg.s1_bar))
        throw Error(ErrorCode::InvalidArgument, "run requires s0_1 > s1_bar");
    if (!(x0 > 0.0))
        throw Error(ErrorCode::InvalidArgument, "run requires x0 > 0");

    const OrbitReference ref = reference ? *reference : orbit_reference(cfg);
    RunResult res;
    State state{Vec(s0.begin(), s0.end()), x0, 0.0};
    res.trajectory.push_back({state, Phase::Flow});

    for (;;) {
        FlowResult flow = integrate_flow(cfg, state, settings);
        for (auto& p : flow.samples)
            res.trajectory.push_back({std::move(p), Phase::Flow});

        if (flow.stop != FlowStop::Event) {
            res.outcome.kind = flow.stop == FlowStop::Washout ? OutcomeKind::Washout : OutcomeKind::BudgetExhausted;
            res.outcome.cycles_completed = static_cast<int>(res.cycles.size());
            res.outcome.final_state = flow.end;
            break;
        }

        CycleRecord rec;
        rec.k = static_cast<int>(res.cycles.size()) + 1;
        rec.t_minus = flow.end.t;
        rec.state_minus = flow.end;
        rec.state_plus = impulse_map(cfg, flow.end, settings.event_tol);
        rec.duration = flow.end.t - state.t;
        rec.x_growth = flow.end.x - state.x;
        res.trajectory.push_back({rec.state_plus, Phase::Impulse});
        state = rec.state_plus;
        res.cycles.push_back(std::move(rec));

        if (auto o = detect_outcome(res.cycles, ref, settings)) {
            res.outcome = *o;
            break;
        }
        if (static_cast<int>(res.cycles.size()) >= settings.max_cycles) {
            res.outcome.kind = OutcomeKind::BudgetExhausted;
            res.outcome.cycles_completed = static_cast<int>(res.cycles.size());
            res.outcome.final_state = state;
            break;
        }
    }

    for (const auto& c : res.cycles)
        if (!(c.duration > 0.0))
            throw Error(ErrorCode::NonFiniteState, "cycle " + std::to_string(c.k) + " has nonpositive duration");
    return res;
}

// ---------------------------------------------------------------------------
// CSV output

inline void write_trajectory_csv(std::ostream& os, const ReactorConfig& cfg, std::span<const TrajectoryPoint> traj)
{
    os << "t";
    for (std::size_t i = 1; i <= cfg.n; ++i)
        os << ",s" << i;
    os << ",x,phase\n";
    for (const auto& p : traj) {
        os << format_number(p.state.t);
        for (double v : p.state.s)
            os << ',' << format_number(v);
        os << ',' << format_number(p.state.x) << ',' << (p.phase == Phase::Flow ? "flow" : "impulse") << '\n';
    }
}

inline void write_cycles_csv(std::ostream& os, const ReactorConfig& cfg, std::span<const CycleRecord> cycles)
{
    os << "k,t_minus,duration";
    for (std::size_t i = 1; i <= cfg.n; ++i)
        os << ",s" << i << "_minus";
    os << ",x_minus";
    for (std::size_t i = 1; i <= cfg.n; ++i)
        os << ",s" << i << "_plus";
    os << ",x_plus\n";
    for (const auto& c : cycles) {
        os << c.k << ',' << format_number(c.t_minus) << ',' << format_number(c.duration);
        for (double v : c.state_minus.s)
            os << ',' << format_number(v);
        os << ',' << format_number(c.state_minus.x);
        for (double v : c.state_plus.s)
            os << ',' << format_number(v);
        os << ',' << format_number(c.state_plus.x) << '\n';
    }
}

} // namespace scf
