#pragma once

#include <string>
#include <vector>

#include "smpkit/types.hpp"

namespace smpkit {

// Function basis for the per-node conditional-expectation projections.
//   Polynomial: monomials of the standardized state up to a total degree.
//   Partition:  indicator averages over per-coordinate quantile cells.
struct RegressionBasis {
    enum class Family { Polynomial, Partition };
    Family family = Family::Polynomial;
    int order = 2;  // polynomial total degree, or cells per coordinate

    static RegressionBasis parse(const std::string& spec);  // "poly:2" | "partition:8"
    std::string to_string() const;
};

// Ridge-regularized least-squares projection onto basis functions of a fixed
// state cross section. Build once per time node, then project any number of
// response rows onto it.
class NodeRegression {
public:
    // states: n x M cross section. ridge >= 0 is added to the normal-equation
    // diagonal (intercept included; the scale is per spec'ed default
    // 1e-8 * M at the call sites).
    NodeRegression(const Mat& states, const RegressionBasis& basis, double ridge);

    int design_dim() const { return static_cast<int>(design_.cols()); }

    // Fitted conditional expectation per path for one response row (length M).
    Vec project(const Eigen::Ref<const Eigen::RowVectorXd>& response) const;

    // Root-mean-square residual of the last projections is tracked externally;
    // this returns the residual for a given response without storing it.
    double residual_rms(const Eigen::Ref<const Eigen::RowVectorXd>& response) const;

private:
    Mat design_;                  // M x B
    Eigen::LLT<Mat> normal_llt_;  // (X^T X + ridge I)
    bool rank_warned_ = false;
};

}  // namespace smpkit
