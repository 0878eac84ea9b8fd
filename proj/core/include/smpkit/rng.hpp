#pragma once

#include <cstdint>

namespace smpkit {

// Counter-based Gaussian stream. Every variate is addressed by
// (seed, path, step, coord), so enlarging the ensemble or reordering the
// path loop never reshuffles draws that were already assigned.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    // Standard normal for the given counter triple.
    double normal(std::uint64_t path, std::uint64_t step, std::uint64_t coord) const;

    // Uniform in [0, 1).
    double uniform(std::uint64_t path, std::uint64_t step, std::uint64_t coord) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace smpkit
