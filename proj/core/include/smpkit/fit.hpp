#pragma once

#include <vector>

#include "smpkit/types.hpp"

namespace smpkit {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    bool degenerate = false;  // all points below the noise floor (exact zero)
};

// Weighted least squares of log(y) against log(x); weights from the relative
// standard errors when provided. Points with y below `floor` mark the fit
// degenerate (the quantity vanishes identically).
SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& y_stderr = {}, double floor = 1e-24);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    long count = 0;
};

// Streaming Welford mean/stderr; deterministic for a fixed visit order.
class RunningStat {
public:
    void add(double v) {
        ++n_;
        const double d = v - mean_;
        mean_ += d / n_;
        m2_ += d * (v - mean_);
    }
    MeanStderr result() const;

private:
    long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace smpkit
