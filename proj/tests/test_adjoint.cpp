#include <doctest.h>

#include <cmath>

#include "smpkit/adjoint.hpp"
#include "smpkit/lq.hpp"
#include "smpkit/registry.hpp"
#include "smpkit/variation.hpp"

using namespace smpkit;

namespace {

PathEnsemble optimal_base(const RegisteredProblem& rp, int N, int M, std::uint64_t seed) {
    auto ric = riccati_solve(*rp.lq, TimeGrid(N, rp.lq->T));
    return simulate(rp.problem, ric.feedback(), TimeGrid(N, rp.lq->T), M, seed,
                    Scheme::SplitStepImplicitDrift);
}

}  // namespace

TEST_SUITE_BEGIN("adjoint");

TEST_CASE("zero costs give zero adjoints") {
    auto rp = get_problem("lq-scalar");
    rp.problem.running_cost = [](double, const Vec&, const Vec&) { return 0.0; };
    rp.problem.running_cost_dx = [](double, const Vec&, const Vec&) { return Vec::Zero(1); };
    rp.problem.running_cost_dxx = [](double, const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    rp.problem.terminal_cost = [](const Vec&) { return 0.0; };
    rp.problem.terminal_cost_dx = [](const Vec&) { return Vec::Zero(1); };
    rp.problem.terminal_cost_dxx = [](const Vec&) { return Mat::Zero(1, 1); };
    auto base = optimal_base(get_problem("lq-scalar"), 50, 500, 3);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);
    for (int i = 0; i <= 50; ++i) {
        CHECK(adj.p[i].cwiseAbs().maxCoeff() == 0.0);
        CHECK(adj.P[i].cwiseAbs().maxCoeff() == 0.0);
    }
    for (int i = 0; i < 50; ++i) CHECK(adj.q[i][0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deterministic linear terminal cost gives a constant adjoint") {
    // b = 0, sigma = 0, f = 0, h = <c, x>: p(t) = -c, q = 0
    ControlProblem prob;
    prob.dim_state = 2;
    prob.dim_noise = 1;
    prob.horizon = 1.0;
    prob.initial_state = Vec::Constant(2, 1.0);
    prob.drift = [](double, const Vec&, const Vec&) { return Vec::Zero(2); };
    prob.drift_dx = [](double, const Vec&, const Vec&) { return Mat::Zero(2, 2); };
    prob.drift_dxx = [](double, const Vec&, const Vec&) {
        return std::vector<Mat>(2, Mat::Zero(2, 2));
    };
    prob.diffusion = [](double, const Vec&, const Vec&) { return Mat::Zero(2, 1); };
    prob.diffusion_dx = [](double, const Vec&, const Vec&) {
        return std::vector<Mat>(1, Mat::Zero(2, 2));
    };
    prob.running_cost = [](double, const Vec&, const Vec&) { return 0.0; };
    prob.running_cost_dx = [](double, const Vec&, const Vec&) { return Vec::Zero(2); };
    prob.running_cost_dxx = [](double, const Vec&, const Vec&) { return Mat::Zero(2, 2); };
    Vec c(2);
    c << 2.0, -3.0;
    prob.terminal_cost = [c](const Vec& x) { return c.dot(x); };
    prob.terminal_cost_dx = [c](const Vec&) { return c; };
    prob.terminal_cost_dxx = [](const Vec&) { return Mat::Zero(2, 2); };
    prob.control_domain.dim_u = 1;
    prob.control_domain.geometry = Box{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};

    auto ctrl = ControlProcess::constant(Vec::Zero(1), 20);
    auto base = simulate(prob, ctrl, TimeGrid(20, 1.0), 100, 2,
                         Scheme::SplitStepImplicitDrift);
    auto adj = solve_first_adjoint(prob, base, RegressionBasis{});
    for (int i = 0; i <= 20; ++i)
        for (int m = 0; m < 100; ++m) {
            // exact up to the ridge bias of the regression (1e-8 * M scale)
            CHECK(adj.p[i](0, m) == doctest::Approx(-2.0).epsilon(1e-6));
            CHECK(adj.p[i](1, m) == doctest::Approx(3.0).epsilon(1e-6));
        }
    for (int i = 0; i < 20; ++i) CHECK(adj.q[i][0].cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("first adjoint tracks the riccati feedback law") {
    auto rp = get_problem("lq-scalar");
    auto base = optimal_base(rp, 200, 8000, 5);
    auto ric = riccati_solve(*rp.lq, base.grid);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i <= 200; ++i) {
        Mat expect = -(ric.S[i] * base.states[i]);
        worst = std::max(worst, (adj.p[i] - expect).cwiseAbs().maxCoeff());
        scale = std::max(scale, expect.cwiseAbs().maxCoeff());
    }
    CHECK(worst / scale <= 0.05);
}

TEST_CASE("a basis rich enough for the value gradient beats a constant one") {
    auto rp = get_problem("lq-scalar");
    auto base = optimal_base(rp, 100, 4000, 6);
    auto ric = riccati_solve(*rp.lq, base.grid);
    auto err = [&](const RegressionBasis& basis) {
        auto adj = solve_first_adjoint(rp.problem, base, basis);
        double worst = 0.0;
        for (int i = 0; i <= 100; ++i)
            worst = std::max(worst,
                             (adj.p[i] + ric.S[i] * base.states[i]).cwiseAbs().maxCoeff());
        return worst;
    };
    // p = -S(t) x is linear in the state: an intercept-only projection is
    // structurally biased, a degree-1 basis captures it up to MC noise
    RegressionBasis deg0{RegressionBasis::Family::Polynomial, 0};
    RegressionBasis deg1{RegressionBasis::Family::Polynomial, 1};
    CHECK(err(deg1) < err(deg0));
}

TEST_CASE("second adjoint is symmetric and matches the scalar backward ODE") {
    auto rp = get_problem("lq-scalar");
    auto base = optimal_base(rp, 200, 8000, 7);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);

    // scalar backward ODE -P' = 2aP - Q, P(1) = -G (independent
    // closed-form linear ODE oracle) -> P(0) = -0.816060279414189
    const double P0 = -0.816060279414189;
    for (int m = 0; m < 8000; m += 997)
        CHECK(adj.P[0](0, m) == doctest::Approx(P0).epsilon(0.02));
    for (int i = 0; i < 200; ++i) CHECK(adj.P_residual[i] >= 0.0);
}

TEST_CASE("decoupled 2d problem reproduces the scalar diagonal") {
    auto rp2 = get_problem("lq-2d");
    auto base = optimal_base(rp2, 60, 3000, 8);
    auto adj = solve_first_adjoint(rp2.problem, base, RegressionBasis{});
    solve_second_adjoint(rp2.problem, base, RegressionBasis{}, adj);
    const double P0 = -0.816060279414189;  // same scalar ODE per block
    for (int m = 0; m < 3000; m += 499) {
        Mat P = adj.P_at(0, m, 2);
        CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK(P(0, 0) == doctest::Approx(P0).epsilon(0.03));
        CHECK(P(1, 1) == doctest::Approx(P0).epsilon(0.03));
        CHECK(std::abs(P(0, 1)) <= 0.03);
    }
}

TEST_CASE("terminal conditions are exact by construction") {
    auto rp = get_problem("lq-scalar");
    auto base = optimal_base(rp, 30, 200, 9);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    solve_second_adjoint(rp.problem, base, RegressionBasis{}, adj);
    for (int m = 0; m < 200; ++m) {
        CHECK(adj.p[30](0, m) == -rp.problem.terminal_cost_dx(base.state(30, m))(0));
        CHECK(adj.P[30](0, m) == -rp.problem.terminal_cost_dxx(base.state(30, m))(0, 0));
    }
}

TEST_CASE("duality identities hold within the noise and grid band") {
    auto rp = get_problem("lq-scalar");
    auto base = optimal_base(rp, 200, 8000, 10);
    auto adj = solve_first_adjoint(rp.problem, base, RegressionBasis{});
    SpikeSpec spike{50, 20, Vec::Constant(1, -0.4)};
    auto y = simulate_first_variation(rp.problem, base, spike);
    auto z = simulate_second_variation(rp.problem, base, spike, y);
    auto rep = duality_check_first(rp.problem, base, spike, y, z, adj);
    CHECK(rep.pass);

    // zero-width spike: both sides vanish
    SpikeSpec none{50, 0, Vec::Constant(1, -0.4)};
    auto y0 = simulate_first_variation(rp.problem, base, none);
    auto z0 = simulate_second_variation(rp.problem, base, none, y0);
    auto rep0 = duality_check_first(rp.problem, base, none, y0, z0, adj);
    CHECK(rep0.lhs_y == 0.0);
    CHECK(rep0.rhs_y == 0.0);
    CHECK(rep0.pass);
}

TEST_SUITE_END();
