#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smpkit/lq.hpp"
#include "smpkit/poly.hpp"
#include "smpkit/problem.hpp"

namespace smpkit {

// Named benchmark instances for the CLI and the test suite. The LQ entries
// carry their spec so callers can build the Riccati oracle for them.
struct RegisteredProblem {
    std::string name;
    ControlProblem problem;
    std::optional<LQSpec> lq;
    std::optional<PolyDriftSpec> poly;
};

std::vector<std::string> registered_problem_names();

// Throws ConfigError for unknown names. Known: "lq-scalar", "lq-2d",
// "poly-cubic", "ou".
RegisteredProblem get_problem(const std::string& name);

}  // namespace smpkit
