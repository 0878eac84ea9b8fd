// dsmp: drive the dissipative-SMP toolkit from the command line.
// One subcommand per task; every run writes results.csv, summary.txt and
// manifest.txt into --out. Exit codes: 0 all verdicts pass, 1 a verdict
// failed, 2 configuration or task error.

#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smpkit/config.hpp"
#include "smpkit/io.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string problem;
    std::string control;
    std::string out_dir;
    std::string scheme;
    std::string basis;
    long paths = -1, steps = -1, seed = -1, threads = -1;
    double ridge = std::numeric_limits<double>::quiet_NaN();
    double tol = std::numeric_limits<double>::quiet_NaN();
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value config file (flags override it)");
    cmd->add_option("--problem", f.problem, "registered problem name");
    cmd->add_option("--control", f.control, "optimal | zero | constant:<v>");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--paths", f.paths, "Monte Carlo ensemble size");
    cmd->add_option("--steps", f.steps, "time grid steps");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--scheme", f.scheme, "explicit | implicit");
    cmd->add_option("--basis", f.basis, "regression basis, e.g. poly:2");
    cmd->add_option("--ridge", f.ridge, "regression ridge penalty");
    cmd->add_option("--tol", f.tol, "check tolerance (default: auto)");
    cmd->add_option("--threads", f.threads, "worker threads");
    cmd->add_flag("--verbose", f.verbose, "print metrics as well as verdicts");
}

smpkit::ExperimentConfig build_config(const std::string& task, const CommonFlags& f,
                                      const std::vector<std::pair<std::string, std::string>>&
                                          extra) {
    smpkit::ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = smpkit::parse_config_file(f.config_path);
    cfg.task = task;
    auto set = [&cfg](const std::string& k, const std::string& v) {
        smpkit::apply_config_key(cfg, k, v);
    };
    if (!f.problem.empty()) set("problem", f.problem);
    if (!f.control.empty()) set("control", f.control);
    if (!f.out_dir.empty()) set("out", f.out_dir);
    if (f.paths >= 0) set("paths", std::to_string(f.paths));
    if (f.steps >= 0) set("steps", std::to_string(f.steps));
    if (f.seed >= 0) set("seed", std::to_string(f.seed));
    if (!f.scheme.empty()) set("scheme", f.scheme);
    if (!f.basis.empty()) set("basis", f.basis);
    if (!std::isnan(f.ridge)) set("ridge", smpkit::csv_cell(f.ridge));
    if (!std::isnan(f.tol)) set("tol", smpkit::csv_cell(f.tol));
    if (f.threads > 0) set("threads", std::to_string(f.threads));
    if (f.verbose) set("verbose", "1");
    for (const auto& [k, v] : extra) set(k, v);
    return cfg;
}

int execute(const smpkit::ExperimentConfig& cfg) {
    auto res = smpkit::run_experiment(cfg);
    for (const auto& v : res.verdicts)
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name
                  << (v.detail.empty() ? "" : "  [" + v.detail + "]") << '\n';
    if (cfg.verbose)
        for (const auto& [name, value] : res.metrics)
            std::cout << "  " << name << " = " << smpkit::csv_cell(value) << '\n';
    return res.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dsmp: simulation, adjoint and maximum-principle checks for "
                 "SDE control problems with dissipative drift"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonFlags flags;
        std::vector<std::pair<std::string, std::string>> extra;
    };
    std::vector<Sub> subs;
    subs.reserve(16);  // callbacks keep references into this vector
    auto add_task = [&](const std::string& name, const std::string& help) -> Sub& {
        subs.push_back({app.add_subcommand(name, help), {}, {}});
        add_common(subs.back().cmd, subs.back().flags);
        return subs.back();
    };

    add_task("validate", "audit the standing hypotheses on random samples");
    add_task("simulate", "simulate the controlled SDE and report moments/cost");
    {
        auto& s = add_task("variation-orders", "spike-variation expansion order fits");
        static std::string eps;
        static long k = -1;
        static double sv = std::numeric_limits<double>::quiet_NaN();
        s.cmd->add_option("--eps", eps, "comma list of spike widths as fractions of T");
        s.cmd->add_option("--k", k, "moment parameter (E|.|^{2k})");
        s.cmd->add_option("--spike-value", sv, "spike control value w");
        s.cmd->callback([&s] {
            if (!eps.empty()) s.extra.emplace_back("eps", eps);
            if (k >= 1) s.extra.emplace_back("k", std::to_string(k));
            if (!std::isnan(sv)) s.extra.emplace_back("spike-value", smpkit::csv_cell(sv));
        });
    }
    {
        auto& s = add_task("cost-expansion", "second-order cost expansion residual check");
        static std::string eps;
        static double sv = std::numeric_limits<double>::quiet_NaN();
        s.cmd->add_option("--eps", eps, "comma list of spike widths as fractions of T");
        s.cmd->add_option("--spike-value", sv, "spike control value w");
        s.cmd->callback([&s] {
            if (!eps.empty()) s.extra.emplace_back("eps", eps);
            if (!std::isnan(sv)) s.extra.emplace_back("spike-value", smpkit::csv_cell(sv));
        });
    }
    add_task("adjoint", "solve both adjoint BSDEs and export node tables");
    {
        auto& s = add_task("smp-check", "Hamiltonian maximality along the candidate pair");
        static long ug = -1;
        s.cmd->add_option("--u-grid", ug, "test controls per coordinate");
        s.cmd->callback([&s] {
            if (ug >= 1) s.extra.emplace_back("u-grid", std::to_string(ug));
        });
    }
    {
        auto& s = add_task("spike-inequality", "eps-scaled spike inequality check");
        static std::string eps;
        static double sv = std::numeric_limits<double>::quiet_NaN();
        s.cmd->add_option("--eps", eps, "comma list of spike widths as fractions of T");
        s.cmd->add_option("--spike-value", sv, "spike control value w");
        s.cmd->callback([&s] {
            if (!eps.empty()) s.extra.emplace_back("eps", eps);
            if (!std::isnan(sv)) s.extra.emplace_back("spike-value", smpkit::csv_cell(sv));
        });
    }
    {
        auto& s = add_task("optimize", "projected gradient descent on the cost");
        static double rho = std::numeric_limits<double>::quiet_NaN();
        static long iters = -1;
        s.cmd->add_option("--rho", rho, "gradient step size");
        s.cmd->add_option("--iters", iters, "iteration count");
        s.cmd->callback([&s] {
            if (!std::isnan(rho)) s.extra.emplace_back("rho", smpkit::csv_cell(rho));
            if (iters >= 0) s.extra.emplace_back("iters", std::to_string(iters));
        });
    }
    add_task("sufficiency", "numerical audit of the sufficient optimality conditions");
    {
        auto& s = add_task("run", "run a task fully described by --config");
        s.cmd->callback([] {});
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (auto& s : subs) {
            if (!s.cmd->parsed()) continue;
            std::string task = s.cmd->get_name();
            if (task == "run") {
                if (s.flags.config_path.empty())
                    throw smpkit::ConfigError("'run' needs --config");
                auto cfg = smpkit::parse_config_file(s.flags.config_path);
                return execute(cfg);
            }
            return execute(build_config(task, s.flags, s.extra));
        }
        throw smpkit::ConfigError("no subcommand given");
    } catch (const smpkit::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const smpkit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
