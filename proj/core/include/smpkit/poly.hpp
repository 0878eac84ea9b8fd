#pragma once

#include <functional>
#include <vector>

#include "smpkit/problem.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

// Scalar odd-degree polynomial drift with strictly negative leading term:
//   b(x, u) = -c(u) x^{2m+1} + sum_{j=1}^{2m} c_j(u) x^j,
// c(u) in [leading_min, leading_max] with leading_min > 0, c_j bounded.
struct PolyDriftSpec {
    int m = 1;
    std::function<double(const Vec&)> leading;              // c(u) >= leading_min
    double leading_min = 1.0;
    std::vector<std::function<double(const Vec&)>> lower;   // c_j(u), j = 1..2m (may be fewer)
    double lower_bound = 0.0;                               // sup_j sup_u |c_j(u)|
    std::function<double(const Vec&)> diffusion;            // sigma(u), constant in x
    std::function<double(const Vec&)> diffusion_du_scalar;  // d sigma / du (dim_u = 1)
    double T = 1.0;
    double x0 = 1.0;
    double u_lo = -1.0, u_hi = 1.0;
    // quadratic cost so the problem is a complete control problem
    double q_weight = 1.0, r_weight = 1.0, g_weight = 0.0;
};

// Certified one-sided Lipschitz constant: maximizes b'(x, u) on a dense grid
// of a box outside of which the leading term provably dominates.
double certify_poly_alpha(const PolyDriftSpec& spec);

ControlProblem make_poly_problem(const PolyDriftSpec& spec);

}  // namespace smpkit
