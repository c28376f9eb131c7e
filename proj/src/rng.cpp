#include "rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ginn {

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi_v<double> * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

uint64_t Rng::uniform_index(uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const uint64_t max = std::numeric_limits<uint64_t>::max();
  // rem == 2^64 mod n, computed without overflow. Draws in the top rem values
  // are rejected so every residue is equally likely; rem == 0 accepts all.
  const uint64_t rem = (max % n + 1) % n;
  uint64_t x;
  do {
    x = gen_();
  } while (rem != 0 && x >= max - rem + 1);
  return x % n;
}

}  // namespace ginn
