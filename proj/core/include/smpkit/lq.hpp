#pragma once

#include <vector>

#include "smpkit/forward.hpp"
#include "smpkit/problem.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

// Linear-quadratic benchmark with affine-in-control diffusion:
//   dx = (A x + B u) dt + sum_j (Sigma0_j + C_j u) dW_j
//   J  = E[ int 1/2 (x^T Q x + u^T R u) dt + 1/2 x(T)^T G x(T) ].
struct LQSpec {
    Mat A;                  // n x n
    Mat B;                  // n x dim_u
    std::vector<Vec> Sigma0;  // d entries, each n
    std::vector<Mat> C;       // d entries, each n x dim_u (may be zero)
    Mat Q, R, G;
    double T = 1.0;
    Vec x0;
    Vec u_lo, u_hi;         // control box

    int n() const { return static_cast<int>(A.rows()); }
    int d() const { return static_cast<int>(Sigma0.size()); }
    int dim_u() const { return static_cast<int>(B.cols()); }
};

// Raised when doubling the Riccati grid still moves S by more than 1e-6.
struct StiffnessWarning : Error { using Error::Error; };

// Backward generalized Riccati system sampled at the SDE grid nodes:
//   Rt = R + sum C_j^T S C_j,  m = B^T g + sum C_j^T S Sigma0_j
//   -S' = A^T S + S A + Q - S B Rt^{-1} B^T S,          S(T) = G
//   -g' = A^T g - S B Rt^{-1} m,                        g(T) = 0
//   -r' = 1/2 sum Sigma0_j^T S Sigma0_j - 1/2 m^T Rt^{-1} m,  r(T) = 0
// Optimal feedback u*(t, x) = -K(t) x - k(t) with K = Rt^{-1} B^T S, k = Rt^{-1} m.
struct RiccatiSolution {
    TimeGrid grid;
    std::vector<Mat> S;   // N+1
    std::vector<Vec> g;
    std::vector<double> r;
    std::vector<Mat> K;
    std::vector<Vec> k;

    double value(const Vec& x0) const {
        return 0.5 * x0.dot(S[0] * x0) + g[0].dot(x0) + r[0];
    }
    // Piecewise-constant-in-node feedback for the simulator.
    ControlProcess feedback() const;
};

// Classical 4th-order one-step integration on a refinement of `grid`
// (refine >= 4), with a built-in doubling self-check.
RiccatiSolution riccati_solve(const LQSpec& spec, const TimeGrid& grid, int refine = 4);

ControlProblem make_lq_problem(const LQSpec& spec);

}  // namespace smpkit
