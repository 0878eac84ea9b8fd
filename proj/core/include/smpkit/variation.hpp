#pragma once

#include <optional>
#include <vector>

#include "smpkit/fit.hpp"
#include "smpkit/forward.hpp"

namespace smpkit {

// Needle perturbation on the grid-aligned window [start_step, start_step + width_steps).
struct SpikeSpec {
    int start_step = 0;
    int width_steps = 0;
    Vec replacement;  // w in the control domain

    double start_time(const TimeGrid& g) const { return g.node(start_step); }
    double width(const TimeGrid& g) const { return width_steps * g.dt(); }
    bool covers(int step) const { return step >= start_step && step < start_step + width_steps; }
};

// Control table equal to the base realization off the spike and == w on it.
std::vector<Mat> spike_perturb(const PathEnsemble& base, const SpikeSpec& spike,
                               const ControlDomain& dom);

// First/second variation trajectories, driven by the base increments. Stored
// like ensembles: per-node n x M cross sections.
struct VariationProcesses {
    std::vector<Mat> y;  // first variation, zero at t = 0
    std::vector<Mat> z;  // second variation, zero at t = 0
};

std::vector<Mat> simulate_first_variation(const ControlProblem& prob, const PathEnsemble& base,
                                          const SpikeSpec& spike);
std::vector<Mat> simulate_second_variation(const ControlProblem& prob, const PathEnsemble& base,
                                           const SpikeSpec& spike, const std::vector<Mat>& y);

struct QuantityOrder {
    std::string name;                  // xi, y, z, eta, zeta
    std::vector<double> eps;           // spike widths (time units)
    std::vector<double> sup_moment;    // sup over nodes of E|.|^{2k}
    std::vector<double> sup_stderr;
    SlopeFit fit;
    bool pass = false;
};

struct ExpansionReport {
    int k = 1;
    std::vector<QuantityOrder> quantities;
    bool all_passed() const {
        for (const auto& q : quantities)
            if (!q.pass) return false;
        return true;
    }
};

struct ExpansionOptions {
    double band_delta = 0.2;   // slope lower-band slack for the O(.) claims
    double zeta_margin = 0.1;  // zeta must exceed 2k by this margin (o(.) evidence)
};

// Simulates the perturbed state and both variations for every spike width in
// `widths` (grid steps, strictly decreasing), fits log-log slopes of the sup
// moments of xi, y, z, eta, zeta and applies the order bands:
// xi, y >= k - delta; z, eta >= 2k - delta; zeta >= 2k + margin.
// Quantities that vanish identically are reported degenerate and pass.
ExpansionReport expansion_orders(const ControlProblem& prob, const PathEnsemble& base,
                                 const std::vector<int>& widths, int start_step, const Vec& w,
                                 int k, const ExpansionOptions& opts = {});

// Monte-Carlo cost: left-endpoint quadrature of f plus the terminal cost.
MeanStderr cost(const ControlProblem& prob, const PathEnsemble& paths);

struct CostExpansionPoint {
    double eps = 0.0;
    double lhs = 0.0;       // J(u^eps) - J(u)
    double rhs = 0.0;       // second-order expansion via y, z
    double residual = 0.0;  // |E(lhs - rhs)|, common random numbers
    double residual_stderr = 0.0;
};

struct CostExpansionReport {
    std::vector<CostExpansionPoint> points;
    SlopeFit residual_fit;
    bool pass = false;  // residual slope > 1, i.e. o(eps)
};

CostExpansionReport cost_expansion_check(const ControlProblem& prob, const PathEnsemble& base,
                                         const std::vector<int>& widths, int start_step, const Vec& w);

}  // namespace smpkit
