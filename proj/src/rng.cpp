#include "koopqg/rng.hpp"

#include <cmath>

namespace kqg::rng {

double uniform(std::uint64_t key) {
  // 53 random bits -> (0,1]: (r+1) * 2^-53 with r in [0, 2^53).
  const std::uint64_t r = splitmix64(key) >> 11;
  return (static_cast<double>(r) + 1.0) * 0x1p-53;
}

double gaussian(std::uint64_t key) {
  const double u1 = uniform(splitmix64(key ^ 0x5bf0a8dcULL));
  const double u2 = uniform(splitmix64(key ^ 0x94c952e1ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace kqg::rng
