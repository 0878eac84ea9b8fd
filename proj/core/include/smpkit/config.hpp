#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpkit/basis.hpp"
#include "smpkit/forward.hpp"
#include "smpkit/types.hpp"

namespace smpkit {

// Resolved experiment description. Parsed from `key = value` text (one pair
// per line, '#' comments); every key is validated, unknown keys are rejected.
struct ExperimentConfig {
    std::string task;           // validate | simulate | variation-orders | cost-expansion |
                                // adjoint | smp-check | spike-inequality | optimize | sufficiency
    std::string problem = "lq-scalar";
    int num_steps = 200;
    double horizon = -1.0;      // < 0: problem default
    int num_paths = 4000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::SplitStepImplicitDrift;
    RegressionBasis basis{};
    double ridge = -1.0;        // < 0: default 1e-8 * M
    std::string control = "optimal";  // optimal | zero | constant:<v>

    // task-specific knobs
    std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025, 0.0125};  // fractions of T
    int k = 1;
    double spike_start_frac = 0.25;
    double spike_value = 0.0;
    int u_grid = 5;
    double rho = 0.5;
    int iters = 100;
    double tol = -1.0;          // < 0: module default
    std::string out_dir = "out";
    int threads = 1;
    bool verbose = false;

    TimeGrid grid(double default_T) const {
        return TimeGrid(num_steps, horizon > 0 ? horizon : default_T);
    }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies one `key = value` assignment; ConfigError names the key on any
// unknown key or malformed value.
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace smpkit
