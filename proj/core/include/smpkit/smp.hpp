#pragma once

#include <vector>

#include "smpkit/adjoint.hpp"
#include "smpkit/forward.hpp"
#include "smpkit/problem.hpp"
#include "smpkit/variation.hpp"

namespace smpkit {

// One (node, path) slice of the ensemble + adjoints, everything the
// Hamiltonian needs at the candidate pair.
struct HamiltonianContext {
    const ControlProblem* prob = nullptr;
    double t = 0.0;
    Vec x;           // candidate state
    Vec u_bar;       // candidate control at (t, x)
    Vec p;           // first adjoint
    Mat q;           // n x d, columns q_j
    Mat P;           // second adjoint (may be empty if unavailable)

    static HamiltonianContext at(const ControlProblem& prob, const PathEnsemble& base,
                                 const AdjointSolution& adj, int node, int path);
};

// H(t, x, u, p, q) = <p, b> + Tr(q^T sigma) - f.
double hamiltonian(const HamiltonianContext& ctx, const Vec& u);

// H plus the second-adjoint trace corrections:
//   - 1/2 Tr(sigma(t,x,u_bar)^T P sigma(t,x,u_bar))
//   + 1/2 Tr((sigma(t,x,u) - sigma(t,x,u_bar))^T P (sigma(t,x,u) - sigma(t,x,u_bar))).
double script_h(const HamiltonianContext& ctx, const Vec& u);

struct SMPWitness {
    double t = 0.0;
    int node = 0, path = 0;
    Vec u;
    double violation = 0.0;  // script_h(u) - script_h(u_bar)
};

struct SMPReport {
    long triples = 0;       // (node, path, u) tests performed
    long violations = 0;
    double violation_fraction = 0.0;
    double tol = 0.0;       // tolerance actually used
    SMPWitness worst;
    bool pass = false;      // fraction <= max_fraction
};

struct SMPOptions {
    double tol = -1.0;           // < 0: auto, 3x combined regression/MC error estimate
    double max_fraction = 0.01;  // "a.e." operationalized
    int node_stride = 1;
    int path_stride = 1;
};

// Maximality test of the candidate pair: script_h(t, x_bar, u) <= script_h(t,
// x_bar, u_bar) + tol over every sampled control, aggregated over (node,
// path, u) triples.
SMPReport smp_check(const ControlProblem& prob, const PathEnsemble& base,
                    const AdjointSolution& adj, const std::vector<Vec>& control_sample,
                    const SMPOptions& opts = {});

struct SpikeInequalityPoint {
    double eps = 0.0;
    double value = 0.0;        // E int [dH + 1/2 Tr(ds^T P ds)] 1_E dt
    double value_over_eps = 0.0;
    double stderr_over_eps = 0.0;
};

struct SpikeInequalityReport {
    Vec w;
    std::vector<SpikeInequalityPoint> points;
    bool pass = false;  // value/eps <= 3*stderr (+ tol) at the two smallest widths
};

// Empirical form of the inequality o(eps) >= E int [dH + 1/2 Tr(ds^T P ds)] 1_E dt
// over a family of shrinking spikes at fixed start node.
SpikeInequalityReport spike_inequality_check(const ControlProblem& prob, const PathEnsemble& base,
                                             const AdjointSolution& adj,
                                             const std::vector<int>& widths, int start_step,
                                             const Vec& w, double tol = 0.0);

}  // namespace smpkit
