#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace smpkit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kVersion = "0.1.0";

// Uniform grid on [0, T]: nodes t_i = i * dt(), i = 0..num_steps.
struct TimeGrid {
    int num_steps = 0;
    double horizon = 0.0;

    TimeGrid() = default;
    TimeGrid(int n, double T) : num_steps(n), horizon(T) {
        if (n <= 0 || T <= 0.0)
            throw std::invalid_argument("TimeGrid: need num_steps > 0 and horizon > 0");
    }
    double dt() const { return horizon / num_steps; }
    double node(int i) const { return horizon * i / num_steps; }
};

// ---- error taxonomy ------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CallbackFailure : Error { using Error::Error; };
struct NonConvexDomain : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };
struct NonFiniteState : Error { using Error::Error; };
struct MisalignedSpike : Error { using Error::Error; };
struct InsufficientDecay : Error { using Error::Error; };
struct SingularStep : Error { using Error::Error; };
struct RankDeficientBasis : Error { using Error::Error; };
struct MissingControlDerivatives : Error { using Error::Error; };
struct Divergence : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct TaskFailure : Error { using Error::Error; };

}  // namespace smpkit
