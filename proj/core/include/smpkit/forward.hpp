#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "smpkit/problem.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

enum class Scheme { ExplicitEuler, SplitStepImplicitDrift };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// M coupled trajectories on a shared grid, stored as per-node cross sections
// (n x M). The Brownian increments are kept so that every downstream process
// (perturbed states, variations, adjoints) is driven by the same noise.
struct PathEnsemble {
    TimeGrid grid;
    int num_paths = 0;
    int dim_state = 0;
    int dim_noise = 0;
    int dim_u = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::SplitStepImplicitDrift;

    std::vector<Mat> states;      // N+1 entries, n x M
    std::vector<Mat> increments;  // N entries, d x M, entry ~ N(0, h)
    std::vector<Mat> controls;    // N entries, dim_u x M (realized control values)

    Vec state(int node, int path) const { return states[node].col(path); }
    Vec control(int step, int path) const { return controls[step].col(path); }
};

// Open-loop (one value per step), feedback (evaluated path-wise at the left
// node), or an explicit per-path table. Adaptedness is structural: the value
// at t_i only sees t_i and x(t_i).
struct DeterministicControl {
    Mat values;  // dim_u x N
};
struct FeedbackControl {
    std::function<Vec(double, const Vec&)> policy;
};
struct PathwiseControl {
    std::vector<Mat> values;  // N entries, dim_u x M
};

struct ControlProcess {
    std::variant<DeterministicControl, FeedbackControl, PathwiseControl> impl;

    static ControlProcess constant(const Vec& u, int num_steps);
    static ControlProcess deterministic(Mat values);
    static ControlProcess feedback(std::function<Vec(double, const Vec&)> policy);
    static ControlProcess pathwise(std::vector<Mat> values);

    Vec value(int step, double t, const Vec& x, int path) const;
};

// Simulates (2.1)-style dynamics path-parallel. The split-step scheme solves
// the drift substep x* = x_i + h b(t_i, x*, u_i) by Newton and adds the
// diffusion explicitly; it requires h * max(alpha, 0) < 1.
PathEnsemble simulate(const ControlProblem& prob, const ControlProcess& ctrl, const TimeGrid& grid,
                      int num_paths, std::uint64_t seed, Scheme scheme);

// Same dynamics, same Brownian increments as `base`, but with the provided
// per-step control table (used for spike perturbations; the off-spike values
// come from the base realization).
PathEnsemble simulate_with_increments(const ControlProblem& prob, const PathEnsemble& base,
                                      const std::vector<Mat>& controls, Scheme scheme);

// Drift-implicit substep: returns y with y = x + h b(t, y, u) to residual
// 1e-12 (1 + |y|). Newton with step halving; throws NewtonDivergence.
Vec implicit_drift_step(const ControlProblem& prob, double t, const Vec& x, const Vec& u, double h);

struct MomentReport {
    double order = 2.0;
    std::vector<double> node_estimate;  // E|x(t_i)|^p per node
    std::vector<double> node_stderr;
    double sup = 0.0;
    double sup_stderr = 0.0;
    int sup_node = 0;
};

// Monte-Carlo moment curve t_i -> E|x(t_i)|^p with standard errors.
MomentReport moment_estimate(const PathEnsemble& paths, double p);

}  // namespace smpkit
