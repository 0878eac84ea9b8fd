#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "smpkit/types.hpp"

namespace smpkit {

struct FiniteSet {
    std::vector<Vec> points;
};

struct Box {
    Vec lower;
    Vec upper;
};

struct ConvexHull {
    std::vector<Vec> vertices;
};

// Control-coefficient derivative callbacks (t, x, u). Only required for the
// convex-domain machinery; they may be left empty otherwise.
using DriftDuFn = std::function<Mat(double, const Vec&, const Vec&)>;          // n x dim_u
using DiffusionDuFn = std::function<std::vector<Mat>(double, const Vec&, const Vec&)>;  // [j] n x dim_u
using RunningCostDuFn = std::function<Vec(double, const Vec&, const Vec&)>;    // dim_u

struct ControlDomain {
    int dim_u = 1;
    std::variant<FiniteSet, Box, ConvexHull> geometry = Box{};

    DriftDuFn drift_du;
    DiffusionDuFn diffusion_du;
    RunningCostDuFn running_cost_du;

    bool is_convex() const { return !std::holds_alternative<FiniteSet>(geometry); }
    bool is_finite() const { return std::holds_alternative<FiniteSet>(geometry); }
    bool has_control_derivatives() const {
        return static_cast<bool>(drift_du) && static_cast<bool>(diffusion_du) &&
               static_cast<bool>(running_cost_du);
    }

    bool contains(const Vec& u, double tol = 1e-9) const;

    // Uniform-ish sample used by validation; deterministic in (key).
    Vec sample(std::uint64_t seed, std::uint64_t key) const;

    // Finite list of test controls for maximality checks: the set itself for
    // FiniteSet, a per-coordinate grid for Box, the vertices plus midpoints
    // for ConvexHull.
    std::vector<Vec> sample_grid(int per_coordinate) const;
};

// Euclidean projection. Throws NonConvexDomain for FiniteSet.
Vec project_control(const ControlDomain& dom, const Vec& u);

}  // namespace smpkit
