// Acceptance suite: each criterion runs standalone (argv[1] in 1..12),
// prints exactly one PASS/FAIL line with its pinned tolerances, and exits
// 0 on pass, 1 on fail.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smpkit/adjoint.hpp"
#include "smpkit/convex.hpp"
#include "smpkit/fit.hpp"
#include "smpkit/forward.hpp"
#include "smpkit/lq.hpp"
#include "smpkit/parallel.hpp"
#include "smpkit/poly.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/runner.hpp"
#include "smpkit/smp.hpp"
#include "smpkit/validate.hpp"
#include "smpkit/variation.hpp"

using namespace smpkit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

PathEnsemble lq_optimal_base(const RegisteredProblem& rp, int N, int M, std::uint64_t seed,
                             RiccatiSolution* out_ric = nullptr) {
    auto ric = riccati_solve(*rp.lq, TimeGrid(N, rp.lq->T));
    if (out_ric) *out_ric = ric;
    return simulate(rp.problem, ric.feedback(), TimeGrid(N, rp.lq->T), M, seed,
                    Scheme::SplitStepImplicitDrift);
}

// ---- 1. hypothesis inheritance --------------------------------------------

Outcome criterion1() {
    auto rp = get_problem("poly-cubic");
    ValidationOptions opts;
    opts.tol = 1e-8;
    auto rep = validate_problem(rp.problem, 10000, 101, opts);
    bool ok = true;
    std::string worst;
    for (const char* name : {"dissipativity-pairwise", "dissipativity-directional",
                             "dissipativity-hilbert-schmidt"}) {
        const auto* c = rep.find(name);
        if (!c || !c->passed) {
            ok = false;
            worst = name;
        }
    }
    return {ok, ok ? "pairwise, directional and Hilbert-Schmidt dissipativity hold on "
                     "10000 samples (tol 1e-8)"
                   : "failed check: " + worst};
}

// ---- 2. stiffness discriminator -------------------------------------------

Outcome criterion2() {
    // b = -x^3, x0 = 2, h = 0.5. A vanishing diffusion would park the explicit
    // map on the exact period-2 orbit {2, -2}; a small noise floor (sigma =
    // 0.01) makes the instability observable without changing the drift.
    PolyDriftSpec spec;
    spec.m = 1;
    spec.leading = [](const Vec&) { return 1.0; };
    spec.leading_min = 1.0;
    spec.lower_bound = 0.0;
    spec.diffusion = [](const Vec&) { return 0.01; };
    spec.diffusion_du_scalar = [](const Vec&) { return 0.0; };
    spec.x0 = 2.0;
    auto prob = make_poly_problem(spec);

    bool explicit_blows = false;
    int blow_steps = -1;
    try {
        // 20 steps of h = 0.5
        prob.horizon = 10.0;
        simulate(prob, ControlProcess::constant(Vec::Zero(1), 20), TimeGrid(20, 10.0), 64, 7,
                 Scheme::ExplicitEuler);
    } catch (const NonFiniteState&) {
        explicit_blows = true;
    }
    if (explicit_blows) blow_steps = 20;  // thrown inside the 20-step run

    // 1e4 steps of h = 0.5 under the split-step implicit scheme
    prob.horizon = 5000.0;
    auto paths = simulate(prob, ControlProcess::constant(Vec::Zero(1), 10000),
                          TimeGrid(10000, 5000.0), 16, 8, Scheme::SplitStepImplicitDrift);
    double max_abs = 0.0;
    for (const auto& x : paths.states) max_abs = std::max(max_abs, x.cwiseAbs().maxCoeff());
    bool implicit_bounded = max_abs <= 2.0;

    bool ok = explicit_blows && implicit_bounded;
    return {ok, fmt("explicit Euler non-finite within %d steps: %s; split-step sup|x| = "
                    "%.4f <= 2 over 10000 steps: %s",
                    blow_steps, explicit_blows ? "yes" : "no", max_abs,
                    implicit_bounded ? "yes" : "no")};
}

// ---- 3. forward oracle ----------------------------------------------------

Outcome criterion3() {
    auto rp = get_problem("ou");
    const int N = 1000, M = 20000;
    auto paths = simulate(rp.problem, ControlProcess::constant(Vec::Zero(1), N),
                          TimeGrid(N, 1.0), M, 9, Scheme::SplitStepImplicitDrift);
    RunningStat stat;
    for (int m = 0; m < M; ++m) {
        double x = paths.states[N](0, m);
        stat.add(x * x);
    }
    auto ms = stat.result();
    const double oracle = (1.0 - std::exp(-2.0)) / 2.0;
    double err = std::abs(ms.mean - oracle);
    bool ok = err <= 3.0 * ms.stderr_;
    return {ok, fmt("E x(1)^2 = %.6f vs (1-e^-2)/2 = %.6f, |err| = %.2e <= 3*stderr = %.2e: %s",
                    ms.mean, oracle, err, 3.0 * ms.stderr_, ok ? "yes" : "no")};
}

// ---- 4. expansion orders --------------------------------------------------

Outcome criterion4() {
    auto rp = get_problem("lq-scalar");
    const int N = 160, M = 50000;
    auto base = simulate(rp.problem, ControlProcess::constant(Vec::Zero(1), N),
                         TimeGrid(N, 1.0), M, 10, Scheme::SplitStepImplicitDrift);
    // eps in {0.2, 0.1, 0.05, 0.025, 0.0125} * T -> widths in grid steps
    std::vector<int> widths = {32, 16, 8, 4, 2};
    auto rep = expansion_orders(rp.problem, base, widths, 40, Vec::Constant(1, -0.4), 1);
    bool ok = true;
    std::string detail;
    for (const auto& q : rep.quantities) {
        double s = q.fit.slope;
        bool in_band;
        std::string band;
        if (q.name == "xi" || q.name == "y") {
            in_band = s >= 0.8 && s <= 1.2;
            band = "[0.8,1.2]";
        } else if (q.name == "z" || q.name == "eta") {
            in_band = s >= 1.8 && s <= 2.4;
            band = "[1.8,2.4]";
        } else {  // zeta
            in_band = q.fit.degenerate || s >= 2.1;
            band = ">=2.1";
        }
        ok = ok && in_band;
        if (!detail.empty()) detail += ", ";
        detail += q.fit.degenerate ? q.name + "=exact-zero(" + band + ")"
                                   : q.name + "=" + fmt("%.2f", s) + "(" + band + ")";
    }
    return {ok, "fitted slopes " + detail};
}

// ---- 5. cost expansion ----------------------------------------------------

Outcome criterion5() {
    auto rp = get_problem("lq-scalar");
    const int N = 160, M = 50000;
    auto base = simulate(rp.problem, ControlProcess::constant(Vec::Zero(1), N),
                         TimeGrid(N, 1.0), M, 10, Scheme::SplitStepImplicitDrift);
    std::vector<int> widths = {32, 16, 8, 4, 2};
    auto rep = cost_expansion_check(rp.problem, base, widths, 40, Vec::Constant(1, -0.4));
    if (rep.residual_fit.degenerate)
        return {true, "expansion residual vanishes identically (stronger than slope >= 1.3)"};
    bool ok = rep.residual_fit.slope >= 1.3;
    return {ok, fmt("|J(u^eps)-J(u) - expansion| residual slope = %.2f >= 1.3: %s",
                    rep.residual_fit.slope, ok ? "yes" : "no")};
}

// ---- 6. first and second adjoint oracle -----------------------------------

Outcome criterion6() {
    auto rp = get_problem("lq-scalar");
    const int N = 200, M = 20000;
    RiccatiSolution ric;
    auto base = lq_optimal_base(rp, N, M, 11, &ric);
    RegressionBasis basis{RegressionBasis::Family::Polynomial, 2};
    auto adj = solve_first_adjoint(rp.problem, base, basis);
    solve_second_adjoint(rp.problem, base, basis, adj);

    double worst_p = 0.0, scale_p = 0.0, worst_P = 0.0;
    for (int i = 0; i <= N; ++i) {
        Mat expect = -(ric.S[i] * base.states[i]);
        double rms_err = std::sqrt((adj.p[i] - expect).squaredNorm() / M);
        double rms_ref = std::sqrt(expect.squaredNorm() / M);
        worst_p = std::max(worst_p, rms_err);
        scale_p = std::max(scale_p, rms_ref);
        double meanP = adj.P[i].row(0).mean();
        worst_P = std::max(worst_P, std::abs(meanP + ric.S[i](0, 0)) / std::abs(ric.S[i](0, 0)));
    }
    double rel_p = worst_p / scale_p;
    bool ok = rel_p <= 0.05 && worst_P <= 0.05;
    return {ok, fmt("max-node rel error: p vs -S(t)x = %.2f%% <= 5%%, P vs -S(t) = %.2f%% <= 5%%",
                    100 * rel_p, 100 * worst_P)};
}

// ---- 7. duality identities ------------------------------------------------

Outcome criterion7() {
    auto rp = get_problem("lq-scalar");
    const int N = 200, M = 20000;
    auto base = lq_optimal_base(rp, N, M, 12);
    RegressionBasis basis{RegressionBasis::Family::Polynomial, 2};
    auto adj = solve_first_adjoint(rp.problem, base, basis);
    SpikeSpec spike{50, 20, Vec::Constant(1, -0.4)};
    auto y = simulate_first_variation(rp.problem, base, spike);
    auto z = simulate_second_variation(rp.problem, base, spike, y);
    auto rep = duality_check_first(rp.problem, base, spike, y, z, adj);
    return {rep.pass,
            fmt("y-identity %.5e vs %.5e (resid %.2e, stderr %.2e), z-identity %.5e vs %.5e "
                "(resid %.2e, stderr %.2e); band 3*stderr + 2h*scale",
                rep.lhs_y, rep.rhs_y, rep.resid_y, rep.stderr_y, rep.lhs_z, rep.rhs_z,
                rep.resid_z, rep.stderr_z)};
}

// ---- 8. smp discrimination ------------------------------------------------

Outcome criterion8() {
    auto rp = get_problem("lq-scalar");
    const int N = 160, M = 20000;
    auto grid9 = rp.problem.control_domain.sample_grid(9);
    std::vector<int> widths = {32, 16, 8, 4};

    SMPOptions opts;
    opts.path_stride = 8;

    // optimal pair
    auto base_opt = lq_optimal_base(rp, N, M, 13);
    auto adj_opt = solve_first_adjoint(rp.problem, base_opt, RegressionBasis{});
    solve_second_adjoint(rp.problem, base_opt, RegressionBasis{}, adj_opt);
    auto smp_opt = smp_check(rp.problem, base_opt, adj_opt, grid9, opts);
    bool spike_opt_ok = true;
    for (const auto& w : grid9) {
        auto sp = spike_inequality_check(rp.problem, base_opt, adj_opt, widths, 40, w);
        spike_opt_ok = spike_opt_ok && sp.pass;
    }

    // suboptimal pair: u == 0 (box boundary)
    auto base0 = simulate(rp.problem, ControlProcess::constant(Vec::Zero(1), N),
                          TimeGrid(N, 1.0), M, 13, Scheme::SplitStepImplicitDrift);
    auto adj0 = solve_first_adjoint(rp.problem, base0, RegressionBasis{});
    solve_second_adjoint(rp.problem, base0, RegressionBasis{}, adj0);
    auto smp0 = smp_check(rp.problem, base0, adj0, grid9, opts);
    double best_ratio = 0.0;
    for (const auto& w : grid9) {
        try {
            auto sp = spike_inequality_check(rp.problem, base0, adj0, widths, 40, w);
            for (const auto& pt : sp.points) {
                // u == 0 makes the diffusion vanish, so the pair is
                // deterministic and the stderr can be exactly zero; any
                // positive value then exceeds every multiple of it
                double se = std::max(pt.stderr_over_eps, 1e-12 * std::abs(pt.value_over_eps));
                if (se > 0)
                    best_ratio = std::max(best_ratio, pt.value_over_eps / se);
                else if (pt.value_over_eps > 0)
                    best_ratio = std::max(best_ratio, 1e12);
            }
        } catch (const InsufficientDecay&) {
            // an unresolved positive sign at this w still counts against the
            // suboptimal pair elsewhere; keep scanning
        }
    }

    bool ok = smp_opt.violation_fraction <= 0.01 && spike_opt_ok &&
              smp0.violation_fraction >= 0.5 && best_ratio >= 5.0;
    std::string ratio_str =
        best_ratio >= 1e11 ? "inf (positive value, zero-noise pair)" : fmt("%.1f", best_ratio);
    return {ok, fmt("optimal: violations %.2f%% <= 1%%, spike value/eps <= 3*stderr at all 9 "
                    "w: %s | u=0: violations %.1f%% >= 50%%, max spike value/(eps*stderr) = "
                    "%s >= 5",
                    100 * smp_opt.violation_fraction, spike_opt_ok ? "yes" : "no",
                    100 * smp0.violation_fraction, ratio_str.c_str())};
}

// ---- 9. gateaux derivative ------------------------------------------------

Outcome criterion9() {
    auto rp = get_problem("lq-scalar");
    const int N = 200, M = 20000;
    auto base = simulate(rp.problem, ControlProcess::constant(Vec::Constant(1, -0.2), N),
                         TimeGrid(N, 1.0), M, 14, Scheme::SplitStepImplicitDrift);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    auto v = constant_direction(base, Vec::Constant(1, 0.15));
    auto g_adj = gateaux_derivative(rp.problem, base, v, &adj, false);
    auto g_free = gateaux_derivative(rp.problem, base, v, nullptr, true);
    double band_agree = 3.0 * (g_adj.stderr_ + g_free.stderr_);
    bool agree = std::abs(g_adj.value - g_free.value) <= band_agree;

    const double theta = 1e-3;
    auto cost_at = [&](double th) {
        std::vector<Mat> ctrl(N);
        for (int i = 0; i < N; ++i) ctrl[i] = base.controls[i] + th * v[i];
        auto paths =
            simulate_with_increments(rp.problem, base, ctrl, Scheme::SplitStepImplicitDrift);
        return cost(rp.problem, paths).mean;
    };
    double fd = (cost_at(theta) - cost_at(-theta)) / (2 * theta);
    // The finite difference is itself a Monte Carlo estimate whose noise
    // matches the adjoint-free estimator's (same per-path cost structure),
    // so each bracket band combines both stderrs; the extra 2% relative
    // covers the O(h) + regression bias of the LSMC (p, q) in the adjoint
    // mode, which its stderr cannot see.
    double scale = std::max({1e-10, std::abs(fd), std::abs(g_free.value)});
    bool bracket =
        std::abs(fd - g_adj.value) <= 3 * (g_adj.stderr_ + g_free.stderr_) + 0.02 * scale &&
        std::abs(fd - g_free.value) <= 3 * (g_free.stderr_ + g_free.stderr_) + 0.02 * scale;
    bool ok = agree && bracket;
    return {ok, fmt("adjoint %.5f vs adjoint-free %.5f (band %.1e): %s; CRN central "
                    "difference (theta=1e-3) %.5f bracketed: %s",
                    g_adj.value, g_free.value, band_agree, agree ? "agree" : "disagree", fd,
                    bracket ? "yes" : "no")};
}

// ---- 10. optimizer --------------------------------------------------------

Outcome criterion10() {
    auto rp = get_problem("lq-scalar");
    OptimizeOptions opts;
    opts.rho = 0.5;
    opts.iters = 200;
    opts.num_paths = 4000;
    opts.grid = TimeGrid(100, 1.0);
    opts.seed = 15;
    auto res = projected_gradient_descent(rp.problem,
                                          ControlProcess::constant(Vec::Zero(1), 100), opts);
    auto ric = riccati_solve(*rp.lq, opts.grid);
    double jstar = ric.value(rp.lq->x0);
    double J = res.trace.back().cost;
    double rel = std::abs(J - jstar) / jstar;
    bool ok = rel <= 0.02 && res.final_vi.pass;
    return {ok, fmt("J = %.5f vs Riccati J* = %.5f after %d iterations, rel err %.2f%% <= "
                    "2%%; final variational inequality: %s",
                    J, jstar, (int)res.trace.size() - 1, 100 * rel,
                    res.final_vi.pass ? "pass" : "fail")};
}

// ---- 11. sufficiency ------------------------------------------------------

Outcome criterion11() {
    auto rp = get_problem("lq-scalar");
    const int N = 100, M = 2000;
    auto base = lq_optimal_base(rp, N, M, 16);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);
    auto rep = sufficiency_check(rp.problem, base, adj, 300);
    bool psd_ok = rep.terminal_convex && rep.hamiltonian_concave && rep.maximality && rep.pass;

    // flip the terminal weight to G = -I
    auto rp_bad = rp;
    rp_bad.problem.terminal_cost = [](const Vec& x) { return -0.5 * x.squaredNorm(); };
    rp_bad.problem.terminal_cost_dx = [](const Vec& x) { return Vec(-x); };
    rp_bad.problem.terminal_cost_dxx = [](const Vec& x) {
        return Mat(-Mat::Identity(x.size(), x.size()));
    };
    auto base_bad = simulate(rp_bad.problem, ControlProcess::constant(Vec::Zero(1), N),
                             TimeGrid(N, 1.0), M, 16, Scheme::SplitStepImplicitDrift);
    auto adj_bad = solve_first_adjoint(rp_bad.problem, base_bad, RegressionBasis{});
    solve_second_adjoint(rp_bad.problem, base_bad, RegressionBasis{}, adj_bad);
    auto rep_bad = sufficiency_check(rp_bad.problem, base_bad, adj_bad, 300);
    bool neg_ok = !rep_bad.terminal_convex && !rep_bad.pass && !rep_bad.witness.empty();

    bool ok = psd_ok && neg_ok;
    return {ok, fmt("PSD weights: convexity/concavity/maximality all pass: %s; G = -I: "
                    "convexity fails with witness \"%s\"",
                    psd_ok ? "yes" : "no", rep_bad.witness.c_str())};
}

// ---- 12. reproducibility --------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion12() {
    // Re-run one representative configuration per task family twice (with
    // worker threads enabled) and require byte-identical results.csv.
    struct Job {
        const char* task;
        const char* problem;
        const char* control;
        int steps, paths;
    };
    std::vector<Job> jobs = {
        {"validate", "poly-cubic", "zero", 100, 2000},
        {"simulate", "lq-scalar", "optimal", 100, 2000},
        {"adjoint", "lq-scalar", "optimal", 100, 2000},
        {"variation-orders", "lq-scalar", "zero", 80, 2000},
        {"smp-check", "lq-scalar", "optimal", 80, 1000},
        {"optimize", "lq-scalar", "zero", 50, 500},
    };
    for (const auto& job : jobs) {
        ExperimentConfig cfg;
        cfg.task = job.task;
        cfg.problem = job.problem;
        cfg.control = job.control;
        cfg.num_steps = job.steps;
        cfg.num_paths = job.paths;
        cfg.iters = 10;
        cfg.threads = 4;
        cfg.out_dir = std::string("/tmp/smpkit-accept12-a-") + job.task;
        run_experiment(cfg);
        cfg.out_dir = std::string("/tmp/smpkit-accept12-b-") + job.task;
        run_experiment(cfg);
        auto a = slurp(std::string("/tmp/smpkit-accept12-a-") + job.task + "/results.csv");
        auto b = slurp(std::string("/tmp/smpkit-accept12-b-") + job.task + "/results.csv");
        if (a.empty() || a != b)
            return {false, fmt("task %s: results.csv differs between identical runs", job.task)};
    }
    return {true, "6 task families re-run with 4 threads: results.csv byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <criterion 1..12>\n", argv[0]);
        return 2;
    }
    int c = std::atoi(argv[1]);
    Outcome out;
    try {
        switch (c) {
            case 1: out = criterion1(); break;
            case 2: out = criterion2(); break;
            case 3: out = criterion3(); break;
            case 4: out = criterion4(); break;
            case 5: out = criterion5(); break;
            case 6: out = criterion6(); break;
            case 7: out = criterion7(); break;
            case 8: out = criterion8(); break;
            case 9: out = criterion9(); break;
            case 10: out = criterion10(); break;
            case 11: out = criterion11(); break;
            case 12: out = criterion12(); break;
            default: std::fprintf(stderr, "unknown criterion %d\n", c); return 2;
        }
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s — %s\n", c, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    return out.pass ? 0 : 1;
}
