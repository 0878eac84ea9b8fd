#pragma once

#include <vector>

#include "smpkit/basis.hpp"
#include "smpkit/forward.hpp"
#include "smpkit/problem.hpp"
#include "smpkit/types.hpp"
#include "smpkit/variation.hpp"

namespace smpkit {

// Backward least-squares Monte Carlo solution of the two adjoint BSDEs along
// a frozen ensemble. Layout mirrors PathEnsemble: node-major, paths in
// columns; P and Q store vec(P) (column-major, n^2 rows).
struct AdjointSolution {
    std::vector<Mat> p;                  // N+1 entries, n x M
    std::vector<std::vector<Mat>> q;     // N entries, [j] n x M
    std::vector<Mat> P;                  // N+1 entries, n^2 x M (symmetric)
    std::vector<std::vector<Mat>> Q;     // N entries, [j] n^2 x M (symmetric)
    int basis_size = 0;
    std::vector<double> p_residual;      // per-step conditional-expectation RMS residual
    std::vector<double> P_residual;

    bool has_second() const { return !P.empty(); }
    Mat P_at(int node, int path, int n) const {
        return Eigen::Map<const Mat>(P[node].col(path).data(), n, n);
    }
};

// First-order adjoint (p, q): q_j(t_i) regresses the martingale increment
// p(t_{i+1}) dW_j / h on the state, p(t_i) solves the per-path implicit
// linear step (I - h D_x b^T) p = E[p_{i+1}|x_i] + h(sum_j D_x sigma_j^T q_j - D_x f).
AdjointSolution solve_first_adjoint(const ControlProblem& prob, const PathEnsemble& base,
                                    const RegressionBasis& basis, double ridge = -1.0);

// Second-order adjoint (P, Q) appended to an existing first-adjoint solution;
// per-path Sylvester-type implicit step P - h(A^T P + P A) = RHS, symmetrized.
void solve_second_adjoint(const ControlProblem& prob, const PathEnsemble& base,
                          const RegressionBasis& basis, AdjointSolution& adj,
                          double ridge = -1.0);

struct DualityReport {
    double lhs_y = 0, rhs_y = 0, resid_y = 0, stderr_y = 0;
    double lhs_z = 0, rhs_z = 0, resid_z = 0, stderr_z = 0;
    bool pass = false;
};

// Monte Carlo check of the two first-adjoint duality identities
//   E<p(T), y(T)> = E int [<D_x f, y> + Tr(q^T delta .sigma) 1_E] dt
//   E<p(T), z(T)> = E int [<D_x f, z> + 1/2(<p, D^2_x b y y> + sum_j <q_j, D^2_x sigma_j y y>)] dt
//                 + E int [<p, delta b> + sum_j <q_j, delta D_x sigma_j y>] 1_E dt
// on common increments; pass when both residuals sit within 3*stderr plus an
// O(h) discretization band.
DualityReport duality_check_first(const ControlProblem& prob, const PathEnsemble& base,
                                  const SpikeSpec& spike, const std::vector<Mat>& y_eps,
                                  const std::vector<Mat>& z_eps, const AdjointSolution& adj,
                                  double h_band_scale = 10.0);

}  // namespace smpkit
