#pragma once

#include <string>
#include <vector>

#include "smpkit/adjoint.hpp"
#include "smpkit/forward.hpp"
#include "smpkit/problem.hpp"
#include "smpkit/smp.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

// Direction process v = u - u_bar on the grid, one dim_u x M block per step.
using DirectionProcess = std::vector<Mat>;

DirectionProcess constant_direction(const PathEnsemble& base, const Vec& v);

// Per-node, per-path control-space gradient
//   G(t) = -dH/du = D_u f - D_u b^T p - sum_j D_u sigma_j^T q_j.
std::vector<Mat> gradient_process(const ControlProblem& prob, const PathEnsemble& base,
                                  const AdjointSolution& adj);

// Linearized state: dy = (D_x b y + D_u b v)dt + (D_x sigma y + D_u sigma v)dW,
// y(0) = 0, on the base increments with the implicit drift step.
std::vector<Mat> simulate_linearized_state(const ControlProblem& prob, const PathEnsemble& base,
                                           const DirectionProcess& v);

struct GateauxValue {
    double value = 0.0;
    double stderr_ = 0.0;
};

// d/dtheta J(u_bar + theta v) at theta = 0. Adjoint-free mode integrates
// E[<D_x h(T), y(T)> + xi(T)] with xi' = <D_x f, y> + <D_u f, v>; adjoint mode
// evaluates E int <G(t), v(t)> dt. Both are exposed; their agreement is a
// discrete duality identity.
GateauxValue gateaux_derivative(const ControlProblem& prob, const PathEnsemble& base,
                                const DirectionProcess& v, const AdjointSolution* adj,
                                bool adjoint_free);

// <dH/du, u - u_bar> <= tol over sampled (node, path, u) triples.
SMPReport variational_inequality_check(const ControlProblem& prob, const PathEnsemble& base,
                                       const AdjointSolution& adj,
                                       const std::vector<Vec>& control_sample,
                                       const SMPOptions& opts = {});

struct OptimizeTracePoint {
    int iter = 0;
    double cost = 0.0;
    double cost_stderr = 0.0;
    double grad_norm = 0.0;
    double rho = 0.0;
};

struct OptimizeResult {
    std::vector<Mat> control;  // pathwise table, dim_u x M per step
    std::vector<OptimizeTracePoint> trace;
    PathEnsemble final_paths;
    SMPReport final_vi;
};

struct OptimizeOptions {
    double rho = 0.5;
    int iters = 100;
    int num_paths = 2000;
    std::uint64_t seed = 1;
    TimeGrid grid = TimeGrid(100, 1.0);
    Scheme scheme = Scheme::SplitStepImplicitDrift;
    RegressionBasis basis{};
    double ridge = -1.0;
    int divergence_patience = 5;  // consecutive uphill steps before halving / giving up
    int max_halvings = 8;
};

// Projected gradient descent on J: u <- project(u - rho G) with adjoints
// re-solved each iteration on common random numbers.
OptimizeResult projected_gradient_descent(const ControlProblem& prob,
                                          const ControlProcess& initial,
                                          const OptimizeOptions& opts);

struct SufficiencyReport {
    bool terminal_convex = false;
    double terminal_min_eig = 0.0;
    bool hamiltonian_concave = false;
    double worst_concavity_gap = 0.0;  // max of H(mid) shortfall (negative is fine)
    bool maximality = false;
    double violation_fraction = 0.0;
    bool pass = false;
    std::string witness;
};

// Numerical audit of the sufficient-condition hypotheses: terminal cost
// convexity (Hessian eigenvalues), midpoint concavity of H in (x, u) on
// random segments, and the maximality condition via smp_check.
SufficiencyReport sufficiency_check(const ControlProblem& prob, const PathEnsemble& base,
                                    const AdjointSolution& adj, int samples,
                                    std::uint64_t seed = 7, double tol = 1e-8);

}  // namespace smpkit
