#pragma once

#include <string>
#include <vector>

#include "smpkit/config.hpp"

namespace smpkit {

struct RunVerdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    std::vector<RunVerdict> verdicts;
    std::vector<std::pair<std::string, double>> metrics;
    int exit_code() const {
        for (const auto& v : verdicts)
            if (!v.pass) return 1;
        return 0;
    }
};

// Dispatches the configured task and writes results.csv, summary.txt and
// manifest.txt into cfg.out_dir. Throws ConfigError for bad configuration
// and TaskFailure for module-level errors (the CLI maps both to exit 2).
RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace smpkit
