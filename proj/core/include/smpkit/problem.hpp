#pragma once

#include <functional>
#include <vector>

#include "smpkit/domain.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

struct GrowthExponents {
    int drift = 0;      // h in the drift bound
    int diffusion = 0;  // k in the second-derivative diffusion bound
    int running = 0;    // l for the running cost
    int terminal = 0;   // m for the terminal cost
};

// A stochastic control problem: coefficients, their state derivatives, cost,
// control domain and the regularity constants the solvers rely on. Callbacks
// must be pure; problems are treated as immutable after construction and are
// called concurrently from many workers.
struct ControlProblem {
    int dim_state = 1;
    int dim_noise = 1;
    double horizon = 1.0;
    Vec initial_state;

    // coefficients b, sigma (column j of sigma is the j-th noise channel)
    std::function<Vec(double, const Vec&, const Vec&)> drift;
    std::function<Mat(double, const Vec&, const Vec&)> drift_dx;                      // n x n
    std::function<std::vector<Mat>(double, const Vec&, const Vec&)> drift_dxx;        // [i] Hessian of b_i
    std::function<Mat(double, const Vec&, const Vec&)> diffusion;                     // n x d
    std::function<std::vector<Mat>(double, const Vec&, const Vec&)> diffusion_dx;     // [j] n x n
    std::function<std::vector<std::vector<Mat>>(double, const Vec&, const Vec&)> diffusion_dxx;  // [j][i]

    // cost f, h
    std::function<double(double, const Vec&, const Vec&)> running_cost;
    std::function<Vec(double, const Vec&, const Vec&)> running_cost_dx;
    std::function<Mat(double, const Vec&, const Vec&)> running_cost_dxx;
    std::function<double(const Vec&)> terminal_cost;
    std::function<Vec(const Vec&)> terminal_cost_dx;
    std::function<Mat(const Vec&)> terminal_cost_dxx;

    double dissipativity_alpha = 0.0;  // one-sided Lipschitz constant of b (may be negative)
    double diffusion_lipschitz = 1.0;
    GrowthExponents growth;

    ControlDomain control_domain;

    int dim_u() const { return control_domain.dim_u; }
};

}  // namespace smpkit
