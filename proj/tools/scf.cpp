// scf: analysis and simulation front end for the self-cycling fermentor model.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "scf/classification.hpp"
#include "scf/config_io.hpp"
#include "scf/fixtures.hpp"
#include "scf/report_io.hpp"
#include "scf/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_numeric = 3;

struct Options {
    std::string config;
    std::string s0;
    std::optional<double> x0;
    std::string out;
    std::vector<std::string> sets;
    std::string format = "csv";
    int grid = 40;
    int r_grid = 200;
    unsigned jobs = 0;
};

// Thrown for bad inputs that are not config errors from the library.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool is_input_error(scf::ErrorCode c)
{
    using scf::ErrorCode;
    return c == ErrorCode::InvalidConfig || c == ErrorCode::ParseError || c == ErrorCode::DimensionMismatch ||
           c == ErrorCode::InvalidArgument;
}

// ---------------------------------------------------------------------------
// tables

using Cell = std::variant<std::monostate, double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c)
{
    if (std::holds_alternative<double>(c))
        return scf::format_number(std::get<double>(c));
    if (std::holds_alternative<long>(c))
        return std::to_string(std::get<long>(c));
    if (std::holds_alternative<std::string>(c))
        return std::get<std::string>(c);
    return "";
}

scf::Json cell_json(const Cell& c)
{
    if (std::holds_alternative<double>(c)) {
        double v = std::get<double>(c);
        return std::isfinite(v) ? scf::Json(v) : scf::Json(nullptr);
    }
    if (std::holds_alternative<long>(c))
        return std::get<long>(c);
    if (std::holds_alternative<std::string>(c))
        return std::get<std::string>(c);
    return nullptr;
}

void write_table(std::ostream& os, const Table& t, const std::string& format)
{
    if (format == "json-doc") {
        scf::Json doc = scf::Json::array();
        for (const auto& row : t.rows) {
            scf::Json obj = scf::Json::object();
            for (std::size_t i = 0; i < t.columns.size(); ++i)
                obj[t.columns[i]] = cell_json(row[i]);
            doc.push_back(std::move(obj));
        }
        os << doc.dump(2) << '\n';
        return;
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << cell_text(row[i]);
        os << '\n';
    }
}

void write_document(std::ostream& os, const scf::Json& doc, const std::string& format)
{
    if (format == "json-doc") {
        os << doc.dump(2) << '\n';
        return;
    }
    os << "key,value\n";
    for (const auto& [k, v] : scf::flatten(doc))
        os << k << ',' << v << '\n';
}

std::string extension(const std::string& format) { return format == "json-doc" ? ".json" : ".csv"; }

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f)
        throw UsageError("cannot write '" + path.string() + "'");
    return f;
}

/// Writes to <out>/<stem><ext> when --out was given, otherwise to stdout.
template <class Fn>
void emit(const Options& o, const std::string& stem, Fn&& write)
{
    if (o.out.empty()) {
        write(std::cout);
        return;
    }
    auto f = open_out(fs::path(o.out) / (stem + extension(o.format)));
    write(f);
}

// ---------------------------------------------------------------------------
// worker pool

/// Evaluates fn(i) for i in [0, count) on `jobs` threads; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned jobs, Fn fn)
{
    std::vector<T> out(count);
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    auto worker = [&](unsigned w) {
        try {
            for (std::size_t i = next++; i < count; i = next++)
                out[i] = fn(i);
        } catch (...) {
            errors[w] = std::current_exception();
            next = count;
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < jobs; ++w)
        threads.emplace_back(worker, w);
    worker(0);
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

// ---------------------------------------------------------------------------
// inputs

scf::ReactorConfig load(const Options& o)
{
    if (o.config.empty())
        throw UsageError("--config is required for this command");
    scf::ReactorConfig cfg = scf::load_config(o.config);
    for (const auto& s : o.sets)
        scf::apply_override(cfg, s);
    if (auto v = scf::validate_config(cfg); !v.empty()) {
        std::string msg = "invalid config:";
        for (const auto& viol : v)
            msg += "\n  " + viol.code + ": " + viol.message;
        throw scf::Error(scf::ErrorCode::InvalidConfig, msg);
    }
    return cfg;
}

std::optional<scf::Vec> parse_s0(const Options& o, const scf::ReactorConfig& cfg)
{
    if (o.s0.empty())
        return std::nullopt;
    scf::Vec v;
    std::stringstream ss(o.s0);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double d = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0' || !std::isfinite(d))
            throw UsageError("--s0: cannot parse '" + item + "' as a number");
        v.push_back(d);
    }
    if (v.size() != cfg.n)
        throw UsageError("--s0 needs " + std::to_string(cfg.n) + " comma-separated values");
    return v;
}

// ---------------------------------------------------------------------------
// commands

scf::Json outcome_json(const scf::RunResult& res, std::size_t impulses)
{
    scf::Json j;
    j["outcome"] = std::string(scf::to_string(res.outcome.kind));
    j["impulses"] = impulses;
    j["t_final"] = res.outcome.final_state.t;
    j["x_final"] = res.outcome.final_state.x;
    j["s_final"] = res.outcome.final_state.s;
    j["limit_x_post"] = res.outcome.limit_x_post ? scf::Json(*res.outcome.limit_x_post) : scf::Json(nullptr);
    j["limit_x_pre"] = res.cycles.empty() ? scf::Json(nullptr) : scf::Json(res.cycles.back().state_minus.x);
    return j;
}

void write_projection_csv(std::ostream& os, const scf::ReactorConfig& cfg, const scf::RunResult& res)
{
    const std::size_t j = scf::projection_index(cfg);
    os << "t,s1,s" << j + 1 << ",phase\n";
    for (const auto& p : res.trajectory)
        os << scf::format_number(p.state.t) << ',' << scf::format_number(p.state.s[0]) << ','
           << scf::format_number(p.state.s[j]) << ',' << (p.phase == scf::Phase::Flow ? "flow" : "impulse") << '\n';
}

/// Runs one simulation and writes trajectory, cycle log and projection CSVs into dir.
scf::Json simulate_into(const scf::ReactorConfig& cfg, const scf::Vec& s0, double x0, const fs::path& dir)
{
    const scf::RunResult res = scf::run(cfg, s0, x0);
    fs::create_directories(dir);
    {
        auto f = open_out(dir / "trajectory.csv");
        scf::write_trajectory_csv(f, cfg, res.trajectory);
    }
    {
        auto f = open_out(dir / "cycles.csv");
        scf::write_cycles_csv(f, cfg, res.cycles);
    }
    {
        auto f = open_out(dir / "projection.csv");
        write_projection_csv(f, cfg, res);
    }
    return outcome_json(res, res.cycles.size());
}

int cmd_classify(const Options& o)
{
    const auto cfg = load(o);
    const auto rep = scf::analyze(cfg, parse_s0(o, cfg), o.x0);
    emit(o, "report", [&](std::ostream& os) { write_document(os, scf::to_json(rep), o.format); });
    return exit_ok;
}

int cmd_simulate(const Options& o)
{
    const auto cfg = load(o);
    if (!o.x0)
        throw UsageError("simulate needs --x0");
    const scf::Vec s0 = parse_s0(o, cfg).value_or(cfg.s_in);
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    const scf::Json j = simulate_into(cfg, s0, *o.x0, dir);
    write_document(std::cout, j, o.format);
    return exit_ok;
}

Table mu_sweep_table(const scf::ReactorConfig& cfg, int points, unsigned jobs)
{
    if (points < 2)
        throw UsageError("--r-grid needs at least 2 points");
    if (scf::region_of(cfg, cfg.s_in).region != scf::Region::Omega1)
        throw scf::Error(scf::ErrorCode::NotInOmega1,
                         "mu-sweep requires s_in in Omega1; with s_in in Omega0 no impulse cycle can be sustained");
    Table t{{"r", "mu", "sign", "kind"}, {}};
    const auto mus = parallel_map<double>(static_cast<std::size_t>(points), jobs, [&](std::size_t k) {
        return scf::mu_of_r(cfg, static_cast<double>(k) / (points - 1));
    });
    auto sign = [](double mu) {
        if (std::abs(mu) < scf::marginal_mu_tol)
            return std::string("0");
        return std::string(mu > 0.0 ? "+" : "-");
    };
    for (int k = 0; k < points; ++k) {
        const double r = static_cast<double>(k) / (points - 1);
        t.rows.push_back({r, mus[k], sign(mus[k]), std::string("grid")});
    }
    if (mus.back() > 0.0) {
        const auto rs = scf::r_star(cfg);
        if (rs) {
            const double mu = scf::mu_of_r(cfg, *rs);
            t.rows.push_back({*rs, mu, sign(mu), std::string("r_star")});
        }
    }
    return t;
}

int cmd_mu_sweep(const Options& o)
{
    const auto cfg = load(o);
    const Table t = mu_sweep_table(cfg, o.r_grid, o.jobs);
    emit(o, "mu_sweep", [&](std::ostream& os) { write_table(os, t, o.format); });
    return exit_ok;
}

int cmd_find_rstar(const Options& o)
{
    const auto cfg = load(o);
    if (scf::region_of(cfg, cfg.s_in).region != scf::Region::Omega1)
        throw scf::Error(scf::ErrorCode::NotInOmega1, "find-rstar requires s_in in Omega1");
    scf::Json j;
    const auto rs = scf::r_star(cfg);
    j["r_star"] = rs ? scf::Json(*rs) : scf::Json("none");
    j["mu_at_r"] = scf::mu_of_r(cfg);
    j["mu_at_1"] = scf::mu_of_r(cfg, 1.0);
    emit(o, "r_star", [&](std::ostream& os) { write_document(os, j, o.format); });
    return exit_ok;
}

struct BasinPoint {
    scf::Vec s;
    std::string region;
    std::optional<double> x;
    std::optional<long> n_rho;
};

Table basin_table(const scf::ReactorConfig& cfg, const std::optional<scf::Vec>& single, int grid, unsigned jobs)
{
    if (scf::region_of(cfg, cfg.s_in).region != scf::Region::Omega1)
        throw scf::Error(scf::ErrorCode::NotInOmega1, "basin requires s_in in Omega1");
    const double mu = scf::mu_of_r(cfg);
    if (!(mu > 0.0))
        throw scf::Error(scf::ErrorCode::NonpositiveMu,
                         "basin requires mu(r) > 0; mu(r) = " + scf::format_number(mu) + " so no periodic orbit exists");
    const double rho = scf::rho(cfg).value;

    std::vector<scf::Vec> points;
    if (single) {
        points.push_back(*single);
    } else {
        if (grid < 2)
            throw UsageError("--grid needs at least 2 points");
        // s1 in (s1_bar, 2 s1_in - s1_bar], s_j in (0, 2 s_j_in]; s_in sits on the grid when --grid is even.
        const std::size_t j = scf::projection_index(cfg);
        for (int a = 1; a <= grid; ++a) {
            for (int b = 1; b <= grid; ++b) {
                scf::Vec s = cfg.s_in;
                s[0] = cfg.s1_bar + (cfg.s_in[0] - cfg.s1_bar) * 2.0 * a / grid;
                if (j != 0)
                    s[j] = cfg.s_in[j] * 2.0 * b / grid;
                points.push_back(std::move(s));
            }
            if (j == 0)
                break;
        }
    }

    const auto rows = parallel_map<BasinPoint>(points.size(), jobs, [&](std::size_t i) {
        BasinPoint p;
        p.s = points[i];
        const auto reg = scf::region_of(cfg, p.s);
        p.region = std::string(scf::to_string(reg.region));
        if (reg.region == scf::Region::Omega1) {
            const auto th = scf::x_threshold(cfg, p.s, rho);
            p.x = th.value;
            p.n_rho = th.n_rho;
        }
        return p;
    });

    Table t;
    for (std::size_t i = 1; i <= cfg.n; ++i)
        t.columns.push_back("s" + std::to_string(i));
    t.columns.insert(t.columns.end(), {"region", "X", "n_rho"});
    for (const auto& p : rows) {
        std::vector<Cell> row(p.s.begin(), p.s.end());
        row.emplace_back(p.region);
        row.push_back(p.x ? Cell(*p.x) : Cell{});
        row.push_back(p.n_rho ? Cell(*p.n_rho) : Cell{});
        t.rows.push_back(std::move(row));
    }
    return t;
}

int cmd_basin(const Options& o)
{
    const auto cfg = load(o);
    const Table t = basin_table(cfg, parse_s0(o, cfg), o.grid, o.jobs);
    emit(o, "basin", [&](std::ostream& os) { write_table(os, t, o.format); });
    return exit_ok;
}

int cmd_levelsets(const Options& o)
{
    const auto cfg = load(o);
    const std::size_t j = cfg.n > 1 ? scf::projection_index(cfg) : 0;
    if (o.grid < 2)
        throw UsageError("--grid needs at least 2 points");
    Table t{{"s1", "s" + std::to_string(j + 1), "F"}, {}};
    const scf::Vec base = parse_s0(o, cfg).value_or(cfg.s_in);
    for (int a = 0; a < o.grid; ++a) {
        for (int b = 0; b < o.grid; ++b) {
            scf::Vec s = base;
            s[0] = cfg.s_in[0] * a / (o.grid - 1);
            s[j] = cfg.s_in[j] * b / (o.grid - 1);
            t.rows.push_back({s[0], s[j], scf::eval_F(cfg, s)});
        }
    }
    emit(o, "levelsets", [&](std::ostream& os) { write_table(os, t, o.format); });
    return exit_ok;
}

// ---------------------------------------------------------------------------
// examples

struct SummaryRow {
    std::string quantity;
    std::string computed;
    std::string reference;
    std::string tolerance;
    std::string status;
};

std::string join(const scf::Vec& v, std::size_t from = 0)
{
    std::string out;
    for (std::size_t i = from; i < v.size(); ++i)
        out += (i > from ? ";" : "") + scf::format_number(v[i]);
    return out;
}

SummaryRow compare(std::string name, double computed, double reference, double tol)
{
    const bool ok = std::abs(computed - reference) <= tol;
    return {std::move(name), scf::format_number(computed), scf::format_number(reference), scf::format_number(tol),
            ok ? "match" : "mismatch"};
}

SummaryRow compare_vec(std::string name, const scf::Vec& computed, const scf::Vec& reference, double tol,
                       bool known_misprint = false)
{
    bool ok = computed.size() == reference.size();
    for (std::size_t i = 0; ok && i < computed.size(); ++i)
        ok = std::abs(computed[i] - reference[i]) <= tol;
    std::string status = ok ? "match" : (known_misprint ? "flagged_misprint" : "mismatch");
    return {std::move(name), join(computed), join(reference), scf::format_number(tol), status};
}

SummaryRow compare_text(std::string name, const std::string& computed, const std::string& reference)
{
    return {std::move(name), computed, reference, "", computed == reference ? "match" : "mismatch"};
}

void write_report(const fs::path& dir, const scf::AnalysisReport& rep, const std::string& format)
{
    auto f = open_out(dir / ("report" + extension(format)));
    write_document(f, scf::to_json(rep), format);
}

int cmd_examples(const Options& o)
{
    const fs::path root = o.out.empty() ? fs::path("examples_out") : fs::path(o.out);
    std::vector<SummaryRow> summary;
    auto sub = [](scf::Vec v) { return scf::Vec(v.begin() + 1, v.end()); };

    // Example 1: s_in in Omega0.
    {
        const auto cfg = scf::fixtures::ex1();
        const fs::path dir = root / "ex1";
        const scf::Vec s0{0.6, 0.7, 0.8};
        const auto rep = scf::analyze(cfg, s0, 0.5);
        write_report(dir, rep, o.format);
        const scf::Json sim = simulate_into(cfg, s0, 0.5, dir / "sim_x0_0.5");
        {
            auto f = open_out(dir / "sim_x0_0.5" / ("outcome" + extension(o.format)));
            write_document(f, sim, o.format);
        }
        summary.push_back(compare_vec("ex1.vbar", {0.0, rep.vbar[1], rep.vbar[2]}, {0.0, -0.20, 0.52}, 5e-3, true));
        summary.push_back(compare_text("ex1.region_of_s_in", std::string(scf::to_string(rep.region_of_input.region)),
                                       "Omega0"));
        summary.push_back(compare_text("ex1.verdict", std::string(scf::to_string(rep.verdict)), "FailOmega0"));
        summary.push_back(compare_text("ex1.sim_outcome", sim["outcome"].get<std::string>(), "Washout"));
    }

    // Example 2: s_in in Omega1 but mu(r) < 0.
    {
        const auto cfg = scf::fixtures::ex2();
        const fs::path dir = root / "ex2";
        const auto rep = scf::analyze(cfg, std::nullopt, 0.5);
        write_report(dir, rep, o.format);
        const scf::Json sim = simulate_into(cfg, cfg.s_in, 0.5, dir / "sim_x0_0.5");
        {
            auto f = open_out(dir / "sim_x0_0.5" / ("outcome" + extension(o.format)));
            write_document(f, sim, o.format);
        }
        {
            auto f = open_out(dir / ("mu_sweep" + extension(o.format)));
            write_table(f, mu_sweep_table(cfg, o.r_grid, o.jobs), o.format);
        }
        summary.push_back(compare("ex2.mu_r", rep.mu_r.value_or(NAN), -0.2924, 1e-3));
        summary.push_back(compare_vec("ex2.vbar", sub(rep.vbar), {-0.6, -0.2}, 5e-3));
        summary.push_back(compare_text("ex2.region_of_s_in", std::string(scf::to_string(rep.region_of_input.region)),
                                       "Omega1"));
        summary.push_back(compare_text("ex2.verdict", std::string(scf::to_string(rep.verdict)), "FailNonpositiveMu"));
        summary.push_back(compare_text("ex2.sim_outcome", sim["outcome"].get<std::string>(), "Washout"));
    }

    // Example 3: mu(r) > 0, threshold X(s0) separates washout from convergence.
    {
        const auto cfg = scf::fixtures::ex3();
        const fs::path dir = root / "ex3";
        const scf::Vec s0{0.3, 0.01, 1.0};
        const auto rep = scf::analyze(cfg, s0, 0.31);
        write_report(dir, rep, o.format);
        const auto th = scf::x_threshold(cfg, s0, rep.rho.value_or(0.0));
        {
            // One step past N^rho shows where the prefix sums turn upward.
            Table t{{"n", "term", "prefix_sum"}, {}};
            const auto g = scf::growth_terms(cfg, s0, th.n_rho + 1);
            double sum = 0.0;
            for (std::size_t k = 0; k < g.terms.size(); ++k) {
                sum += g.terms[k];
                t.rows.push_back({static_cast<long>(k + 1), g.terms[k], sum});
            }
            auto f = open_out(dir / ("x_threshold_terms" + extension(o.format)));
            write_table(f, t, o.format);

            const scf::Vec corrected{-0.1766, -0.0575, -0.0330, -0.0206, -0.0104, 0.0007};
            const scf::Vec printed{-0.1766, -0.0575, -0.330, -0.206, -0.0104, 0.0007};
            const scf::Vec& computed = g.terms;
            summary.push_back(compare_vec("ex3.x_threshold_terms", computed, corrected, 1e-3));
            summary.push_back(compare_vec("ex3.x_threshold_terms_as_printed", computed, printed, 1e-3, true));
            double sum_printed = 0.0, sum_corrected = 0.0;
            for (int k = 0; k < 5; ++k) {
                sum_printed -= printed[k];
                sum_corrected -= corrected[k];
            }
            summary.push_back(compare("ex3.x_threshold_sum_of_corrected_terms", sum_corrected, 0.2981, 1e-3));
            SummaryRow row = compare("ex3.x_threshold_sum_of_printed_terms", sum_printed, 0.2981, 1e-3);
            if (row.status == "mismatch")
                row.status = "flagged_misprint";
            summary.push_back(row);
        }
        for (double x0 : {0.29, 0.31}) {
            const std::string name = x0 < 0.3 ? "sim_x0_0.29" : "sim_x0_0.31";
            const scf::Json sim = simulate_into(cfg, s0, x0, dir / name);
            auto f = open_out(dir / name / ("outcome" + extension(o.format)));
            write_document(f, sim, o.format);
            if (x0 < 0.3) {
                summary.push_back(compare_text("ex3.sim_x0_0.29.outcome", sim["outcome"].get<std::string>(), "Washout"));
                SummaryRow r{"ex3.sim_x0_0.29.impulses", std::to_string(sim["impulses"].get<std::size_t>()), "<=4", "",
                             sim["impulses"].get<std::size_t>() <= 4 ? "match" : "mismatch"};
                summary.push_back(r);
            } else {
                summary.push_back(
                    compare_text("ex3.sim_x0_0.31.outcome", sim["outcome"].get<std::string>(), "ConvergedToPeriodic"));
            }
        }
        {
            auto f = open_out(dir / ("mu_sweep" + extension(o.format)));
            write_table(f, mu_sweep_table(cfg, o.r_grid, o.jobs), o.format);
        }
        {
            auto f = open_out(dir / ("basin" + extension(o.format)));
            write_table(f, basin_table(cfg, std::nullopt, o.grid, o.jobs), o.format);
        }
        summary.push_back(compare("ex3.mu_r", rep.mu_r.value_or(NAN), 0.0037, 5e-4));
        summary.push_back(compare_vec("ex3.V_s0", scf::lyapunov_v(cfg, s0).v, {0.0, -0.35, 0.6}, 1e-12));
        summary.push_back(compare_vec("ex3.vbar", sub(rep.vbar), {-0.375, -0.375}, 1e-12));
        summary.push_back(compare_text("ex3.region_of_s0",
                                       std::string(scf::to_string(rep.region_of_initial->region)), "Omega1"));
        summary.push_back(compare("ex3.x_threshold", th.value, 0.2981, 3e-3));
        summary.push_back(compare_text("ex3.verdict_x0_0.31", std::string(scf::to_string(rep.verdict)),
                                       "ConvergesToPeriodic"));
        const auto low = scf::theorem_main_verdict(cfg, s0, 0.29);
        summary.push_back(compare_text("ex3.verdict_x0_0.29", std::string(scf::to_string(low.verdict)),
                                       "FailsAfterFinitelyManyCycles"));
    }

    Table t{{"quantity", "computed", "reference", "tolerance", "status"}, {}};
    for (auto& r : summary)
        t.rows.push_back({r.quantity, r.computed, r.reference, r.tolerance, r.status});
    {
        auto f = open_out(root / ("summary" + extension(o.format)));
        write_table(f, t, o.format);
    }
    write_table(std::cout, t, o.format);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-cycling fermentor analysis and simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "Reactor config file");
    app.add_option("--s0", o.s0, "Initial resources, comma separated");
    app.add_option("--x0", o.x0, "Initial biomass");
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--set", o.sets, "Override a config key, key=value")->take_all();
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json-doc"}));
    app.add_option("--grid", o.grid, "Points per axis for basin and levelsets");
    app.add_option("--r-grid", o.r_grid, "Number of r values for mu-sweep");
    app.add_option("--jobs", o.jobs, "Worker threads for sweeps (0 = all cores)");

    int (*handler)(const Options&) = nullptr;
    auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
        app.add_subcommand(name, help)->callback([&handler, fn] { handler = fn; });
    };
    add("classify", "Region, mu(r), r*, rho, X(s0) and the outcome verdict", cmd_classify);
    add("simulate", "Time-domain run with trajectory and cycle CSVs", cmd_simulate);
    add("mu-sweep", "mu(r) on a uniform grid of r", cmd_mu_sweep);
    add("find-rstar", "Critical decant fraction", cmd_find_rstar);
    add("basin", "X(s0) over a grid of initial resources", cmd_basin);
    add("examples", "Regenerate the three bundled examples", cmd_examples);
    add("levelsets", "Uptake rate F on a grid for contour plots", cmd_levelsets);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }

    try {
        return handler(o);
    } catch (const scf::Error& e) {
        std::cerr << "scf: " << e.what() << '\n';
        return is_input_error(e.code()) ? exit_invalid : exit_numeric;
    } catch (const UsageError& e) {
        std::cerr << "scf: " << e.what() << '\n';
        return exit_invalid;
    } catch (const std::exception& e) {
        std::cerr << "scf: " << e.what() << '\n';
        return exit_numeric;
    }
}
