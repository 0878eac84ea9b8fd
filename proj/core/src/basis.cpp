#include "smpkit/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smpkit {
namespace {

// Multi-indices of total degree <= deg in n variables, graded order.
std::vector<std::vector<int>> total_degree_indices(int n, int deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(n, 0);
    // Iterate over all tuples with entries in [0, deg], keep total <= deg.
    while (true) {
        int total = 0;
        for (int v : idx) total += v;
        if (total <= deg) out.push_back(idx);
        int c = 0;
        while (c < n) {
            if (++idx[c] <= deg) break;
            idx[c++] = 0;
        }
        if (c == n) break;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        int sa = 0, sb = 0;
        for (int v : a) sa += v;
        for (int v : b) sb += v;
        if (sa != sb) return sa < sb;
        return a < b;
    });
    return out;
}

}  // namespace

RegressionBasis RegressionBasis::parse(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    RegressionBasis b;
    if (name == "poly") {
        b.family = Family::Polynomial;
    } else if (name == "partition") {
        b.family = Family::Partition;
    } else {
        throw Error("unknown basis family '" + name + "' (expected poly or partition)");
    }
    b.order = 2;
    if (colon != std::string::npos) {
        try {
            b.order = std::stoi(spec.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error("bad basis order in '" + spec + "'");
        }
    }
    if (b.order < 1) throw Error("basis order must be >= 1");
    return b;
}

std::string RegressionBasis::to_string() const {
    return (family == Family::Polynomial ? "poly:" : "partition:") + std::to_string(order);
}

NodeRegression::NodeRegression(const Mat& states, const RegressionBasis& basis, double ridge) {
    const int n = static_cast<int>(states.rows());
    const int M = static_cast<int>(states.cols());
    if (M < 2) throw RankDeficientBasis("regression needs at least 2 paths");

    // Standardize coordinates so polynomial powers stay well conditioned.
    Vec mean = states.rowwise().mean();
    Vec scale(n);
    for (int i = 0; i < n; ++i) {
        double var = (states.row(i).array() - mean(i)).square().mean();
        scale(i) = std::sqrt(std::max(var, 1e-300));
        if (scale(i) < 1e-14 * (1.0 + std::abs(mean(i)))) scale(i) = 1.0;
    }

    if (basis.family == RegressionBasis::Family::Polynomial) {
        auto indices = total_degree_indices(n, basis.order);
        design_.resize(M, static_cast<int>(indices.size()));
        for (int m = 0; m < M; ++m) {
            Vec z = (states.col(m) - mean).cwiseQuotient(scale);
            for (std::size_t b = 0; b < indices.size(); ++b) {
                double v = 1.0;
                for (int i = 0; i < n; ++i)
                    for (int e = 0; e < indices[b][i]; ++e) v *= z(i);
                design_(m, static_cast<int>(b)) = v;
            }
        }
    } else {
        // Per-coordinate quantile cells; design is the one-hot cell indicator,
        // so projection is the within-cell average.
        const int q = basis.order;
        Mat edges(n, q - 1);
        for (int i = 0; i < n; ++i) {
            std::vector<double> xs(states.row(i).data(), states.row(i).data() + M);
            std::sort(xs.begin(), xs.end());
            for (int c = 0; c + 1 < q; ++c) {
                double pos = (c + 1) * static_cast<double>(M) / q;
                int lo = std::min(M - 1, static_cast<int>(pos));
                edges(i, c) = xs[lo];
            }
        }
        long cells = 1;
        for (int i = 0; i < n; ++i) cells *= q;
        if (cells > M) throw RankDeficientBasis("partition basis has more cells than paths");
        design_ = Mat::Zero(M, static_cast<int>(cells));
        for (int m = 0; m < M; ++m) {
            long cell = 0;
            for (int i = 0; i < n; ++i) {
                int c = 0;
                while (c < q - 1 && states(i, m) > edges(i, c)) ++c;
                cell = cell * q + c;
            }
            design_(m, static_cast<int>(cell)) = 1.0;
        }
    }

    Mat normal = design_.transpose() * design_;
    normal.diagonal().array() += ridge;
    normal_llt_.compute(normal);
    if (normal_llt_.info() != Eigen::Success) {
        if (ridge <= 0.0)
            throw RankDeficientBasis("normal equations are singular; use a ridge penalty or a smaller basis");
        // A ridged normal matrix is positive definite up to roundoff; a
        // failure here means the design itself is pathological.
        throw RankDeficientBasis("ridged normal equations failed to factor");
    }
}

Vec NodeRegression::project(const Eigen::Ref<const Eigen::RowVectorXd>& response) const {
    Vec beta = normal_llt_.solve(design_.transpose() * response.transpose());
    return design_ * beta;
}

double NodeRegression::residual_rms(const Eigen::Ref<const Eigen::RowVectorXd>& response) const {
    Vec fitted = project(response);
    return std::sqrt((fitted - response.transpose()).squaredNorm() / fitted.size());
}

}  // namespace smpkit
