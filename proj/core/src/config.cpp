#include "smpkit/config.hpp"

#include <fstream>
#include <sstream>

namespace smpkit {
namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': bad number '" + v + "'");
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': bad integer '" + v + "'");
    }
}

const std::vector<std::string> kTasks = {
    "validate",      "simulate",         "variation-orders", "cost-expansion", "adjoint",
    "smp-check",     "spike-inequality", "optimize",         "sufficiency"};

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "task") {
        for (const auto& t : kTasks)
            if (value == t) {
                cfg.task = value;
                return;
            }
        throw ConfigError("key 'task': unknown task '" + value + "'");
    } else if (key == "problem") {
        cfg.problem = value;
    } else if (key == "steps") {
        cfg.num_steps = static_cast<int>(parse_int(key, value));
        if (cfg.num_steps <= 0) throw ConfigError("key 'steps': must be positive");
    } else if (key == "horizon") {
        cfg.horizon = parse_double(key, value);
    } else if (key == "paths") {
        cfg.num_paths = static_cast<int>(parse_int(key, value));
        if (cfg.num_paths <= 0) throw ConfigError("key 'paths': must be positive");
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "scheme") {
        try {
            cfg.scheme = scheme_from_name(value);
        } catch (const Error& e) {
            throw ConfigError(std::string("key 'scheme': ") + e.what());
        }
    } else if (key == "basis") {
        try {
            cfg.basis = RegressionBasis::parse(value);
        } catch (const Error& e) {
            throw ConfigError(std::string("key 'basis': ") + e.what());
        }
    } else if (key == "ridge") {
        cfg.ridge = parse_double(key, value);
    } else if (key == "control") {
        cfg.control = value;
    } else if (key == "eps") {
        cfg.eps_list.clear();
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.eps_list.push_back(parse_double(key, trim(tok)));
        if (cfg.eps_list.empty()) throw ConfigError("key 'eps': empty list");
    } else if (key == "k") {
        cfg.k = static_cast<int>(parse_int(key, value));
        if (cfg.k < 1) throw ConfigError("key 'k': must be >= 1");
    } else if (key == "spike-start") {
        cfg.spike_start_frac = parse_double(key, value);
    } else if (key == "spike-value") {
        cfg.spike_value = parse_double(key, value);
    } else if (key == "u-grid") {
        cfg.u_grid = static_cast<int>(parse_int(key, value));
        if (cfg.u_grid < 1) throw ConfigError("key 'u-grid': must be >= 1");
    } else if (key == "rho") {
        cfg.rho = parse_double(key, value);
    } else if (key == "iters") {
        cfg.iters = static_cast<int>(parse_int(key, value));
    } else if (key == "tol") {
        cfg.tol = parse_double(key, value);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_int(key, value));
        if (cfg.threads < 1) throw ConfigError("key 'threads': must be >= 1");
    } else if (key == "verbose") {
        cfg.verbose = (value == "1" || value == "true");
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (cfg.task.empty()) throw ConfigError("missing required key 'task'");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace smpkit
