#include "smpkit/registry.hpp"

namespace smpkit {
namespace {

LQSpec lq_scalar_spec() {
    LQSpec s;
    s.A = Mat::Constant(1, 1, -0.5);
    s.B = Mat::Constant(1, 1, 0.3);
    s.Sigma0 = {Vec::Zero(1)};
    s.C = {Mat::Constant(1, 1, 0.4)};
    s.Q = Mat::Constant(1, 1, 1.0);
    s.R = Mat::Constant(1, 1, 1.0);
    s.G = Mat::Constant(1, 1, 0.5);
    s.T = 1.0;
    s.x0 = Vec::Constant(1, 1.0);
    // one-sided control box: the optimal feedback lives in the interior while
    // u = 0 sits on the boundary as a natural suboptimal reference
    s.u_lo = Vec::Constant(1, -0.4);
    s.u_hi = Vec::Constant(1, 0.0);
    return s;
}

LQSpec lq_2d_spec() {
    // two decoupled copies of the scalar problem driven by independent noises
    LQSpec s1 = lq_scalar_spec();
    LQSpec s;
    s.A = Mat::Zero(2, 2);
    s.A.diagonal().setConstant(s1.A(0, 0));
    s.B = Mat::Zero(2, 2);
    s.B.diagonal().setConstant(s1.B(0, 0));
    s.Sigma0 = {Vec::Zero(2), Vec::Zero(2)};
    Mat C1 = Mat::Zero(2, 2), C2 = Mat::Zero(2, 2);
    C1(0, 0) = s1.C[0](0, 0);
    C2(1, 1) = s1.C[0](0, 0);
    s.C = {C1, C2};
    s.Q = Mat::Identity(2, 2);
    s.R = Mat::Identity(2, 2);
    s.G = 0.5 * Mat::Identity(2, 2);
    s.T = 1.0;
    s.x0 = Vec::Constant(2, 1.0);
    s.u_lo = Vec::Constant(2, -0.4);
    s.u_hi = Vec::Constant(2, 0.0);
    return s;
}

PolyDriftSpec poly_cubic_spec() {
    PolyDriftSpec s;
    s.m = 1;
    s.leading = [](const Vec&) { return 1.0; };
    s.leading_min = 1.0;
    s.lower = {};  // pure -x^3 drift
    s.lower_bound = 0.0;
    s.diffusion = [](const Vec&) { return 0.5; };
    s.diffusion_du_scalar = [](const Vec&) { return 0.0; };
    s.T = 1.0;
    s.x0 = 1.0;
    s.u_lo = -1.0;
    s.u_hi = 1.0;
    s.q_weight = 1.0;
    s.r_weight = 1.0;
    s.g_weight = 0.0;
    return s;
}

LQSpec ou_spec() {
    // Ornstein-Uhlenbeck: dx = -x dt + dW, x0 = 0, costs kept but irrelevant
    LQSpec s;
    s.A = Mat::Constant(1, 1, -1.0);
    s.B = Mat::Constant(1, 1, 0.0);
    s.Sigma0 = {Vec::Constant(1, 1.0)};
    s.C = {Mat::Zero(1, 1)};
    s.Q = Mat::Constant(1, 1, 1.0);
    s.R = Mat::Constant(1, 1, 1.0);
    s.G = Mat::Zero(1, 1);
    s.T = 1.0;
    s.x0 = Vec::Zero(1);
    s.u_lo = Vec::Constant(1, -1.0);
    s.u_hi = Vec::Constant(1, 1.0);
    return s;
}

}  // namespace

std::vector<std::string> registered_problem_names() {
    return {"lq-scalar", "lq-2d", "poly-cubic", "ou"};
}

RegisteredProblem get_problem(const std::string& name) {
    RegisteredProblem rp;
    rp.name = name;
    if (name == "lq-scalar") {
        rp.lq = lq_scalar_spec();
        rp.problem = make_lq_problem(*rp.lq);
    } else if (name == "lq-2d") {
        rp.lq = lq_2d_spec();
        rp.problem = make_lq_problem(*rp.lq);
    } else if (name == "poly-cubic") {
        rp.poly = poly_cubic_spec();
        rp.problem = make_poly_problem(*rp.poly);
    } else if (name == "ou") {
        rp.lq = ou_spec();
        rp.problem = make_lq_problem(*rp.lq);
    } else {
        throw ConfigError("unknown problem '" + name + "'");
    }
    return rp;
}

}  // namespace smpkit
