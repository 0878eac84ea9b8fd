#include "smpkit/rng.hpp"

#include <cmath>

namespace smpkit {
namespace {

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix4(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    std::uint64_t h = splitmix(a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    h = splitmix(h ^ d);
    return h;
}

inline double to_unit(std::uint64_t x) {
    // 53-bit mantissa, in (0, 1].
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double CounterRng::normal(std::uint64_t path, std::uint64_t step, std::uint64_t coord) const {
    const std::uint64_t h1 = mix4(seed_, path, step, 2 * coord);
    const std::uint64_t h2 = mix4(seed_, path, step, 2 * coord + 1);
    const double u1 = to_unit(h1);
    const double u2 = to_unit(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

double CounterRng::uniform(std::uint64_t path, std::uint64_t step, std::uint64_t coord) const {
    return to_unit(mix4(seed_ ^ 0xa5a5a5a5a5a5a5a5ULL, path, step, coord)) - 0x1.0p-53;
}

}  // namespace smpkit
