#include "smpkit/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "smpkit/adjoint.hpp"
#include "smpkit/convex.hpp"
#include "smpkit/io.hpp"
#include "smpkit/lq.hpp"
#include "smpkit/parallel.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/smp.hpp"
#include "smpkit/validate.hpp"
#include "smpkit/variation.hpp"

namespace smpkit {
namespace {

namespace fs = std::filesystem;

struct TaskContext {
    ExperimentConfig cfg;
    RegisteredProblem rp;
    TimeGrid grid;
    RunResult res;

    void verdict(const std::string& name, bool pass, const std::string& detail = "") {
        res.verdicts.push_back({name, pass, detail});
    }
    void metric(const std::string& name, double value) {
        res.metrics.emplace_back(name, value);
    }
};

ControlProcess resolve_control(const TaskContext& tc) {
    const auto& cfg = tc.cfg;
    const int du = tc.rp.problem.dim_u();
    if (cfg.control == "optimal") {
        if (!tc.rp.lq)
            throw ConfigError("control=optimal needs a problem with a Riccati oracle ('" +
                              cfg.problem + "' has none); use control=zero or constant:<v>");
        auto ric = riccati_solve(*tc.rp.lq, tc.grid);
        return ric.feedback();
    }
    if (cfg.control == "zero") return ControlProcess::constant(Vec::Zero(du), tc.grid.num_steps);
    if (cfg.control.rfind("constant:", 0) == 0) {
        double v = std::stod(cfg.control.substr(9));
        return ControlProcess::constant(Vec::Constant(du, v), tc.grid.num_steps);
    }
    throw ConfigError("key 'control': unknown value '" + cfg.control + "'");
}

std::vector<int> eps_to_widths(const TaskContext& tc) {
    std::vector<int> widths;
    for (double frac : tc.cfg.eps_list) {
        int w = static_cast<int>(std::lround(frac * tc.grid.num_steps));
        if (w < 1)
            throw ConfigError("key 'eps': width " + std::to_string(frac) +
                              " is below one grid step at steps=" +
                              std::to_string(tc.grid.num_steps));
        widths.push_back(w);
    }
    for (std::size_t i = 1; i < widths.size(); ++i)
        if (widths[i] >= widths[i - 1])
            throw ConfigError("key 'eps': widths must be strictly decreasing on the grid");
    return widths;
}

int spike_start(const TaskContext& tc) {
    int s = static_cast<int>(std::lround(tc.cfg.spike_start_frac * tc.grid.num_steps));
    return std::min(std::max(s, 0), tc.grid.num_steps - 1);
}

void task_validate(TaskContext& tc) {
    auto report = validate_problem(tc.rp.problem, 10000, tc.cfg.seed);
    for (const auto& c : report.checks) {
        tc.verdict("validate/" + c.name, c.passed, c.witness);
        tc.metric(c.name + "-worst", c.worst);
    }
}

void task_simulate(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto paths = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                          tc.cfg.scheme);
    auto mom = moment_estimate(paths, 2.0);
    tc.metric("sup-second-moment", mom.sup);
    tc.metric("sup-second-moment-stderr", mom.sup_stderr);
    auto J = cost(tc.rp.problem, paths);
    tc.metric("cost", J.mean);
    tc.metric("cost-stderr", J.stderr_);
    if (tc.rp.lq) {
        auto ric = riccati_solve(*tc.rp.lq, tc.grid);
        tc.metric("riccati-value", ric.value(tc.rp.lq->x0));
    }
    export_node_table(fs::path(tc.cfg.out_dir) / "states.csv", {"x"}, paths.states,
                      tc.grid.dt());
    tc.verdict("simulate/finite", true);
}

void task_variation_orders(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    Vec w = Vec::Constant(tc.rp.problem.dim_u(), tc.cfg.spike_value);
    auto rep = expansion_orders(tc.rp.problem, base, eps_to_widths(tc), spike_start(tc), w,
                                tc.cfg.k);
    CsvWriter csv(fs::path(tc.cfg.out_dir) / "orders.csv",
                  {"quantity", "eps", "sup_moment", "sup_stderr", "slope"});
    for (const auto& q : rep.quantities) {
        for (std::size_t i = 0; i < q.eps.size(); ++i)
            csv.raw_row({q.name, csv_cell(q.eps[i]), csv_cell(q.sup_moment[i]),
                         csv_cell(q.sup_stderr[i]), csv_cell(q.fit.slope)});
        tc.metric("slope-" + q.name, q.fit.slope);
        tc.verdict("variation-orders/" + q.name, q.pass,
                   q.fit.degenerate ? "degenerate (identically zero)" : "");
    }
}

void task_cost_expansion(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    Vec w = Vec::Constant(tc.rp.problem.dim_u(), tc.cfg.spike_value);
    auto rep = cost_expansion_check(tc.rp.problem, base, eps_to_widths(tc), spike_start(tc), w);
    CsvWriter csv(fs::path(tc.cfg.out_dir) / "cost_expansion.csv",
                  {"eps", "lhs", "rhs", "residual", "residual_stderr"});
    for (const auto& p : rep.points)
        csv.row({p.eps, p.lhs, p.rhs, p.residual, p.residual_stderr});
    tc.metric("residual-slope", rep.residual_fit.slope);
    tc.verdict("cost-expansion/residual-order", rep.pass);
}

AdjointSolution solve_adjoints(const TaskContext& tc, const PathEnsemble& base, bool second) {
    auto adj = solve_first_adjoint(tc.rp.problem, base, tc.cfg.basis, tc.cfg.ridge);
    if (second) solve_second_adjoint(tc.rp.problem, base, tc.cfg.basis, adj, tc.cfg.ridge);
    return adj;
}

void task_adjoint(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    auto adj = solve_adjoints(tc, base, true);
    export_node_table(fs::path(tc.cfg.out_dir) / "p.csv", {"p"}, adj.p, tc.grid.dt());
    export_node_table(fs::path(tc.cfg.out_dir) / "P.csv", {"P"}, adj.P, tc.grid.dt());

    double res = 0.0;
    for (double r : adj.p_residual) res = std::max(res, r);
    tc.metric("max-regression-residual", res);
    tc.metric("basis-size", adj.basis_size);

    if (tc.rp.lq) {
        // oracle comparison p ~ -(S x + g), P ~ Lyapunov second adjoint
        auto ric = riccati_solve(*tc.rp.lq, tc.grid);
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i <= tc.grid.num_steps; ++i) {
            Mat expect = -(ric.S[i] * base.states[i]);
            expect.colwise() -= ric.g[i];
            worst = std::max(worst, (adj.p[i] - expect).cwiseAbs().maxCoeff());
            scale = std::max(scale, expect.cwiseAbs().maxCoeff());
        }
        double rel = worst / std::max(scale, 1e-12);
        tc.metric("p-vs-riccati-rel-error", rel);
        tc.verdict("adjoint/p-oracle", rel <= 0.05);
    } else {
        tc.verdict("adjoint/finite", true);
    }
}

void task_smp_check(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    auto adj = solve_adjoints(tc, base, true);
    SMPOptions opts;
    opts.tol = tc.cfg.tol;
    opts.path_stride = std::max(1, tc.cfg.num_paths / 256);
    auto sample = tc.rp.problem.control_domain.sample_grid(tc.cfg.u_grid);
    auto rep = smp_check(tc.rp.problem, base, adj, sample, opts);
    tc.metric("violation-fraction", rep.violation_fraction);
    tc.metric("tol", rep.tol);
    CsvWriter csv(fs::path(tc.cfg.out_dir) / "violations.csv",
                  {"t", "node", "path", "violation"});
    if (rep.violations > 0)
        csv.row({rep.worst.t, static_cast<double>(rep.worst.node),
                 static_cast<double>(rep.worst.path), rep.worst.violation});
    tc.verdict("smp-check/maximality", rep.pass,
               "violation fraction " + csv_cell(rep.violation_fraction));
}

void task_spike_inequality(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    auto adj = solve_adjoints(tc, base, true);
    Vec w = Vec::Constant(tc.rp.problem.dim_u(), tc.cfg.spike_value);
    auto rep = spike_inequality_check(tc.rp.problem, base, adj, eps_to_widths(tc),
                                      spike_start(tc), w, std::max(tc.cfg.tol, 0.0));
    CsvWriter csv(fs::path(tc.cfg.out_dir) / "spike_inequality.csv",
                  {"eps", "value", "value_over_eps", "stderr_over_eps"});
    for (const auto& p : rep.points)
        csv.row({p.eps, p.value, p.value_over_eps, p.stderr_over_eps});
    if (!rep.points.empty())
        tc.metric("value-over-eps", rep.points.back().value_over_eps);
    tc.verdict("spike-inequality/nonpositive", rep.pass);
}

void task_optimize(TaskContext& tc) {
    OptimizeOptions opts;
    opts.rho = tc.cfg.rho;
    opts.iters = tc.cfg.iters;
    opts.num_paths = tc.cfg.num_paths;
    opts.seed = tc.cfg.seed;
    opts.grid = tc.grid;
    opts.scheme = tc.cfg.scheme;
    opts.basis = tc.cfg.basis;
    opts.ridge = tc.cfg.ridge;
    ControlProcess init = ControlProcess::constant(Vec::Zero(tc.rp.problem.dim_u()),
                                                   tc.grid.num_steps);
    auto res = projected_gradient_descent(tc.rp.problem, init, opts);
    CsvWriter csv(fs::path(tc.cfg.out_dir) / "optimize_trace.csv",
                  {"iter", "J", "J_stderr", "grad_norm", "rho"});
    for (const auto& p : res.trace)
        csv.row({static_cast<double>(p.iter), p.cost, p.cost_stderr, p.grad_norm, p.rho});
    export_node_table(fs::path(tc.cfg.out_dir) / "control.csv", {"u"}, res.control,
                      tc.grid.dt());
    tc.metric("final-cost", res.trace.back().cost);
    tc.verdict("optimize/variational-inequality", res.final_vi.pass);
    if (tc.rp.lq) {
        auto ric = riccati_solve(*tc.rp.lq, tc.grid);
        double Jstar = ric.value(tc.rp.lq->x0);
        tc.metric("riccati-value", Jstar);
        double rel = std::abs(res.trace.back().cost - Jstar) / std::max(std::abs(Jstar), 1e-12);
        tc.metric("cost-vs-riccati-rel-error", rel);
        tc.verdict("optimize/near-oracle", rel <= 0.02);
    }
}

void task_sufficiency(TaskContext& tc) {
    auto ctrl = resolve_control(tc);
    auto base = simulate(tc.rp.problem, ctrl, tc.grid, tc.cfg.num_paths, tc.cfg.seed,
                         tc.cfg.scheme);
    auto adj = solve_adjoints(tc, base, true);
    auto rep = sufficiency_check(tc.rp.problem, base, adj, 200, tc.cfg.seed + 1);
    tc.metric("terminal-min-eig", rep.terminal_min_eig);
    tc.metric("worst-concavity-gap", rep.worst_concavity_gap);
    tc.metric("maximality-violation-fraction", rep.violation_fraction);
    tc.verdict("sufficiency/terminal-convex", rep.terminal_convex, rep.witness);
    tc.verdict("sufficiency/hamiltonian-concave", rep.hamiltonian_concave, rep.witness);
    tc.verdict("sufficiency/maximality", rep.maximality);
}

void write_outputs(const TaskContext& tc) {
    const fs::path dir(tc.cfg.out_dir);
    {
        CsvWriter csv(dir / "results.csv", {"metric", "value"});
        for (const auto& [name, value] : tc.res.metrics) csv.raw_row({name, csv_cell(value)});
        for (const auto& v : tc.res.verdicts)
            csv.raw_row({"verdict/" + v.name, v.pass ? "1" : "0"});
    }
    {
        std::ofstream out(dir / "summary.txt", std::ios::binary);
        for (const auto& v : tc.res.verdicts)
            out << (v.pass ? "PASS " : "FAIL ") << v.name
                << (v.detail.empty() ? "" : "  [" + v.detail + "]") << '\n';
        out << (tc.res.exit_code() == 0 ? "ALL PASS" : "FAILURES PRESENT") << '\n';
    }
    {
        std::ofstream out(dir / "manifest.txt", std::ios::binary);
        const auto& c = tc.cfg;
        out << "smpkit " << kVersion << '\n'
            << "task = " << c.task << '\n'
            << "problem = " << c.problem << '\n'
            << "steps = " << c.num_steps << '\n'
            << "horizon = " << csv_cell(tc.grid.horizon) << '\n'
            << "paths = " << c.num_paths << '\n'
            << "seed = " << c.seed << '\n'
            << "scheme = " << scheme_name(c.scheme) << '\n'
            << "basis = " << c.basis.to_string() << '\n'
            << "control = " << c.control << '\n'
            << "threads = " << c.threads << '\n';
    }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    TaskContext tc;
    tc.cfg = cfg;
    tc.rp = get_problem(cfg.problem);
    tc.grid = cfg.grid(tc.rp.problem.horizon);
    set_num_threads(cfg.threads);
    std::filesystem::create_directories(cfg.out_dir);

    try {
        if (cfg.task == "validate")
            task_validate(tc);
        else if (cfg.task == "simulate")
            task_simulate(tc);
        else if (cfg.task == "variation-orders")
            task_variation_orders(tc);
        else if (cfg.task == "cost-expansion")
            task_cost_expansion(tc);
        else if (cfg.task == "adjoint")
            task_adjoint(tc);
        else if (cfg.task == "smp-check")
            task_smp_check(tc);
        else if (cfg.task == "spike-inequality")
            task_spike_inequality(tc);
        else if (cfg.task == "optimize")
            task_optimize(tc);
        else if (cfg.task == "sufficiency")
            task_sufficiency(tc);
        else
            throw ConfigError("unknown task '" + cfg.task + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw TaskFailure("task '" + cfg.task + "' on '" + cfg.problem + "': " + e.what());
    }

    write_outputs(tc);
    return tc.res;
}

}  // namespace smpkit
