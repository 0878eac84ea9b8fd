#pragma once

#include <string>
#include <vector>

#include "smpkit/problem.hpp"

namespace smpkit {

struct HypothesisCheck {
    std::string name;
    bool passed = false;
    double worst = 0.0;      // worst observed margin or ratio (check-specific)
    std::string witness;     // human-readable description of the worst sample
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    const HypothesisCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct ValidationOptions {
    double box_halfwidth = 2.0;  // sampling box for states, centered at x0
    double tol = 1e-8;           // absolute slack on the sign conditions
    double fd_step = 1e-4;
    double fd_rel_tol = 1e-5;
};

// Randomized hypothesis audit: pairwise and directional dissipativity,
// Hilbert-Schmidt dissipativity on random symmetric matrices, diffusion
// Lipschitz bound, derivative/finite-difference consistency, and the
// polynomial-growth envelopes. Sampling, not proof: a pass means
// "consistent on this sample".
ValidationReport validate_problem(const ControlProblem& prob, int samples, std::uint64_t seed,
                                  const ValidationOptions& opts = {});

}  // namespace smpkit
