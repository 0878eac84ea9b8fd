#include <doctest.h>

#include <cmath>

#include "smpkit/convex.hpp"
#include "smpkit/lq.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/variation.hpp"

using namespace smpkit;

namespace {

PathEnsemble zero_control_base(const RegisteredProblem& rp, int N, int M, std::uint64_t seed) {
    return simulate(rp.problem, ControlProcess::constant(Vec::Zero(1), N), TimeGrid(N, 1.0), M,
                    seed, Scheme::SplitStepImplicitDrift);
}

}  // namespace

TEST_SUITE_BEGIN("convex");

TEST_CASE("zero direction gives zero derivative in both modes") {
    auto rp = get_problem("lq-scalar");
    auto base = zero_control_base(rp, 50, 500, 21);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    auto v = constant_direction(base, Vec::Zero(1));
    auto g1 = gateaux_derivative(rp.problem, base, v, &adj, false);
    auto g2 = gateaux_derivative(rp.problem, base, v, nullptr, true);
    CHECK(g1.value == 0.0);
    CHECK(g2.value == 0.0);
}

TEST_CASE("linearized state matches the scalar ODE and ito isometry") {
    // lq-scalar linearization around any control: dy = (-0.5 y + 0.3 v)dt + 0.4 v dW.
    // With v = 1: E y(1) = 0.3(1 - e^{-1/2})/0.5 (linear ODE oracle)
    //             Var y(1) = 0.16(1 - e^{-1}) (Ito isometry oracle)
    const double mean_oracle = 0.23608160417241994;
    const double var_oracle = 0.10113928941256925;
    auto rp = get_problem("lq-scalar");
    const int N = 200, M = 20000;
    auto base = zero_control_base(rp, N, M, 22);
    auto v = constant_direction(base, Vec::Constant(1, 1.0));
    auto y = simulate_linearized_state(rp.problem, base, v);
    RunningStat stat;
    for (int m = 0; m < M; ++m) stat.add(y[N](0, m));
    auto ms = stat.result();
    double h = 1.0 / N;
    CHECK(std::abs(ms.mean - mean_oracle) <= 3 * ms.stderr_ + 2 * h * mean_oracle);
    double var = 0.0;
    for (int m = 0; m < M; ++m) var += (y[N](0, m) - ms.mean) * (y[N](0, m) - ms.mean);
    var /= (M - 1);
    CHECK(std::abs(var - var_oracle) <= 4 * var_oracle / std::sqrt((double)M) + 3 * h * var_oracle);
}

TEST_CASE("adjoint and adjoint-free gateaux derivatives agree") {
    auto rp = get_problem("lq-scalar");
    auto base = zero_control_base(rp, 150, 8000, 23);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    auto v = constant_direction(base, Vec::Constant(1, -0.3));
    auto g_adj = gateaux_derivative(rp.problem, base, v, &adj, false);
    auto g_free = gateaux_derivative(rp.problem, base, v, nullptr, true);
    double band = 3 * (g_adj.stderr_ + g_free.stderr_) + 0.05 * std::abs(g_free.value);
    CHECK(std::abs(g_adj.value - g_free.value) <= band);
}

TEST_CASE("gateaux derivative is bracketed by finite differences") {
    auto rp = get_problem("lq-scalar");
    const int N = 100, M = 10000;
    auto base = zero_control_base(rp, N, M, 24);
    auto v = constant_direction(base, Vec::Constant(1, -0.3));
    auto g = gateaux_derivative(rp.problem, base, v, nullptr, true);
    auto cost_at = [&](double theta) {
        std::vector<Mat> ctrl(N);
        for (int i = 0; i < N; ++i) ctrl[i] = base.controls[i] + theta * v[i];
        auto paths = simulate_with_increments(rp.problem, base, ctrl,
                                              Scheme::SplitStepImplicitDrift);
        return cost(rp.problem, paths).mean;
    };
    for (double theta : {1e-2, 1e-3}) {
        double fd = (cost_at(theta) - cost_at(-theta)) / (2 * theta);
        // common random numbers: FD noise cancels almost entirely, the
        // remaining gap is the O(theta^2) curvature term
        CHECK(std::abs(fd - g.value) <= 1e-2 * std::max(1.0, std::abs(g.value)));
    }
}

TEST_CASE("missing control derivatives are reported") {
    auto rp = get_problem("lq-scalar");
    rp.problem.control_domain.drift_du = nullptr;
    auto base = zero_control_base(rp, 20, 100, 25);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    CHECK_THROWS_AS(gradient_process(rp.problem, base, adj), MissingControlDerivatives);
}

TEST_CASE("zero step size leaves the control untouched") {
    auto rp = get_problem("lq-scalar");
    OptimizeOptions opts;
    opts.rho = 0.0;
    opts.iters = 3;
    opts.num_paths = 300;
    opts.grid = TimeGrid(40, 1.0);
    opts.seed = 26;
    auto res = projected_gradient_descent(rp.problem,
                                          ControlProcess::constant(Vec::Constant(1, -0.1), 40),
                                          opts);
    for (auto& blk : res.control)
        CHECK((blk.array() == -0.1).all());
}

TEST_CASE("gradient descent reaches the riccati optimum") {
    auto rp = get_problem("lq-scalar");
    OptimizeOptions opts;
    opts.rho = 0.5;
    opts.iters = 80;
    opts.num_paths = 2000;
    opts.grid = TimeGrid(100, 1.0);
    opts.seed = 27;
    auto res = projected_gradient_descent(rp.problem,
                                          ControlProcess::constant(Vec::Zero(1), 100), opts);
    auto ric = riccati_solve(*rp.lq, opts.grid);
    double jstar = ric.value(rp.lq->x0);
    double final_cost = res.trace.back().cost;
    CHECK(std::abs(final_cost - jstar) / jstar <= 0.03);
    // descent trace: best cost should improve on the starting cost
    CHECK(res.trace.back().cost < res.trace.front().cost);
    CHECK(res.final_vi.pass);
}

TEST_CASE("sufficiency audit passes on the lq problem") {
    auto rp = get_problem("lq-scalar");
    auto ric = riccati_solve(*rp.lq, TimeGrid(100, 1.0));
    auto base = simulate(rp.problem, ric.feedback(), TimeGrid(100, 1.0), 2000, 28,
                         Scheme::SplitStepImplicitDrift);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);
    auto rep = sufficiency_check(rp.problem, base, adj, 200);
    CHECK(rep.terminal_convex);
    CHECK(rep.terminal_min_eig >= 0.0);
    CHECK(rep.hamiltonian_concave);
    CHECK(rep.maximality);
    CHECK(rep.pass);
}

TEST_CASE("concave terminal cost fails the audit with a witness") {
    auto rp = get_problem("lq-scalar");
    rp.problem.terminal_cost = [](const Vec& x) { return -x.squaredNorm(); };
    rp.problem.terminal_cost_dx = [](const Vec& x) { return Vec(-2.0 * x); };
    rp.problem.terminal_cost_dxx = [](const Vec&) { return Mat::Constant(1, 1, -2.0); };
    auto base = zero_control_base(rp, 60, 500, 29);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);
    auto rep = sufficiency_check(rp.problem, base, adj, 100);
    CHECK_FALSE(rep.terminal_convex);
    CHECK(rep.terminal_min_eig < 0.0);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.witness.empty());
}

TEST_SUITE_END();
