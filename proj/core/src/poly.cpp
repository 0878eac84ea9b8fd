#include "smpkit/poly.hpp"

#include <cmath>

namespace smpkit {
namespace {

double poly_b(const PolyDriftSpec& spec, double x, const Vec& u) {
    double v = -spec.leading(u) * std::pow(x, 2 * spec.m + 1);
    for (std::size_t j = 0; j < spec.lower.size(); ++j)
        v += spec.lower[j](u) * std::pow(x, static_cast<int>(j) + 1);
    return v;
}

double poly_db(const PolyDriftSpec& spec, double x, const Vec& u) {
    double v = -(2 * spec.m + 1) * spec.leading(u) * std::pow(x, 2 * spec.m);
    for (std::size_t j = 0; j < spec.lower.size(); ++j)
        v += (static_cast<int>(j) + 1) * spec.lower[j](u) * std::pow(x, static_cast<int>(j));
    return v;
}

double poly_ddb(const PolyDriftSpec& spec, double x, const Vec& u) {
    double v = -(2 * spec.m + 1) * (2 * spec.m) * spec.leading(u) *
               std::pow(x, 2 * spec.m - 1);
    for (std::size_t j = 1; j < spec.lower.size(); ++j)
        v += (static_cast<int>(j) + 1) * static_cast<int>(j) * spec.lower[j](u) *
             std::pow(x, static_cast<int>(j) - 1);
    return v;
}

}  // namespace

double certify_poly_alpha(const PolyDriftSpec& spec) {
    // Outside |x| = R the leading term dominates every lower-order derivative
    // term: (2m+1) c_min R^{2m} >= sum_j j |c_j| R^{j-1} once R is large
    // enough; then b'(x, u) <= 0 there and the grid maximum inside is global.
    const int deg = 2 * spec.m;
    double R = 1.0;
    auto tail_ok = [&](double r) {
        double lead = (deg + 1) * spec.leading_min * std::pow(r, deg);
        double rest = 0.0;
        for (std::size_t j = 0; j < spec.lower.size(); ++j)
            rest += (static_cast<int>(j) + 1) * spec.lower_bound *
                    std::pow(r, static_cast<int>(j));
        return lead >= rest;
    };
    while (!tail_ok(R) && R < 1e6) R *= 2.0;

    double alpha = 0.0;
    const int grid = 4001;
    const int ugrid = 21;
    for (int iu = 0; iu < ugrid; ++iu) {
        Vec u(1);
        u(0) = spec.u_lo + (spec.u_hi - spec.u_lo) * iu / (ugrid - 1);
        for (int i = 0; i < grid; ++i) {
            double x = -R + 2.0 * R * i / (grid - 1);
            alpha = std::max(alpha, poly_db(spec, x, u));
        }
    }
    return alpha * (1.0 + 1e-6) + 1e-12;  // safety margin over the grid maximum
}

ControlProblem make_poly_problem(const PolyDriftSpec& spec) {
    ControlProblem prob;
    prob.dim_state = 1;
    prob.dim_noise = 1;
    prob.horizon = spec.T;
    prob.initial_state = Vec::Constant(1, spec.x0);

    prob.drift = [spec](double, const Vec& x, const Vec& u) -> Vec {
        return Vec::Constant(1, poly_b(spec, x(0), u));
    };
    prob.drift_dx = [spec](double, const Vec& x, const Vec& u) -> Mat {
        return Mat::Constant(1, 1, poly_db(spec, x(0), u));
    };
    prob.drift_dxx = [spec](double, const Vec& x, const Vec& u) {
        return std::vector<Mat>{Mat::Constant(1, 1, poly_ddb(spec, x(0), u))};
    };
    prob.diffusion = [spec](double, const Vec&, const Vec& u) -> Mat {
        return Mat::Constant(1, 1, spec.diffusion ? spec.diffusion(u) : 0.0);
    };
    prob.diffusion_dx = [](double, const Vec&, const Vec&) {
        return std::vector<Mat>{Mat::Zero(1, 1)};
    };
    prob.diffusion_dxx = [](double, const Vec&, const Vec&) {
        return std::vector<std::vector<Mat>>{{Mat::Zero(1, 1)}};
    };
    prob.running_cost = [spec](double, const Vec& x, const Vec& u) {
        return 0.5 * (spec.q_weight * x(0) * x(0) + spec.r_weight * u(0) * u(0));
    };
    prob.running_cost_dx = [spec](double, const Vec& x, const Vec&) -> Vec {
        return Vec::Constant(1, spec.q_weight * x(0));
    };
    prob.running_cost_dxx = [spec](double, const Vec&, const Vec&) -> Mat {
        return Mat::Constant(1, 1, spec.q_weight);
    };
    prob.terminal_cost = [spec](const Vec& x) { return 0.5 * spec.g_weight * x(0) * x(0); };
    prob.terminal_cost_dx = [spec](const Vec& x) -> Vec {
        return Vec::Constant(1, spec.g_weight * x(0));
    };
    prob.terminal_cost_dxx = [spec](const Vec&) -> Mat {
        return Mat::Constant(1, 1, spec.g_weight);
    };

    prob.dissipativity_alpha = certify_poly_alpha(spec);
    prob.diffusion_lipschitz = 0.0;
    prob.growth = GrowthExponents{2 * spec.m + 1, 0, 2, 2};

    ControlDomain dom;
    dom.dim_u = 1;
    dom.geometry = Box{Vec::Constant(1, spec.u_lo), Vec::Constant(1, spec.u_hi)};
    dom.drift_du = [spec](double, const Vec& x, const Vec& u) -> Mat {
        // central difference in u on the user coefficients keeps this module
        // usable for the convex machinery without extra callbacks
        const double e = 1e-6;
        Vec up = u, um = u;
        up(0) += e;
        um(0) -= e;
        return Mat::Constant(1, 1, (poly_b(spec, x(0), up) - poly_b(spec, x(0), um)) / (2 * e));
    };
    dom.diffusion_du = [spec](double, const Vec&, const Vec& u) {
        double g = spec.diffusion_du_scalar ? spec.diffusion_du_scalar(u) : 0.0;
        return std::vector<Mat>{Mat::Constant(1, 1, g)};
    };
    dom.running_cost_du = [spec](double, const Vec&, const Vec& u) -> Vec {
        return Vec::Constant(1, spec.r_weight * u(0));
    };
    prob.control_domain = dom;
    return prob;
}

}  // namespace smpkit
