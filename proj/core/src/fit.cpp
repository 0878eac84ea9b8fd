#include "smpkit/fit.hpp"

#include <cmath>

namespace smpkit {

SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& y_stderr, double floor) {
    SlopeFit fit;
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_fit: need >= 2 matched points");

    bool any_positive = false;
    for (double v : y)
        if (v > floor) any_positive = true;
    if (!any_positive) {
        fit.degenerate = true;
        return fit;
    }

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    std::vector<double> lx, ly, w;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= floor) continue;  // drop exact zeros, keep the informative points
        const double X = std::log(x[i]);
        const double Y = std::log(y[i]);
        double weight = 1.0;
        if (!y_stderr.empty() && y_stderr[i] > 0.0) {
            const double rel = y_stderr[i] / y[i];  // sd of log(y) ~ relative error
            weight = 1.0 / (rel * rel + 1e-12);
        }
        lx.push_back(X);
        ly.push_back(Y);
        w.push_back(weight);
        sw += weight;
        swx += weight * X;
        swy += weight * Y;
        swxx += weight * X * X;
        swxy += weight * X * Y;
    }
    if (lx.size() < 2) {
        fit.degenerate = true;
        return fit;
    }
    const double det = sw * swxx - swx * swx;
    fit.slope = (sw * swxy - swx * swy) / det;
    fit.intercept = (swy - fit.slope * swx) / sw;

    double ss_res = 0, ss_tot = 0;
    const double ybar = swy / sw;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double pred = fit.intercept + fit.slope * lx[i];
        ss_res += w[i] * (ly[i] - pred) * (ly[i] - pred);
        ss_tot += w[i] * (ly[i] - ybar) * (ly[i] - ybar);
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

MeanStderr RunningStat::result() const {
    MeanStderr r;
    r.mean = mean_;
    r.count = n_;
    r.stderr_ = n_ > 1 ? std::sqrt(m2_ / (n_ - 1) / n_) : 0.0;
    return r;
}

}  // namespace smpkit
