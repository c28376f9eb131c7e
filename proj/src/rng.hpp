#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ginn {

// Deterministic random source for everything in the library: simulation
// shocks, weight init, dropout, batch shuffling.
//
// mt19937_64 gives an identical stream on every platform, but the standard
// distribution adaptors do not (std::normal_distribution and std::shuffle
// are implementation defined), so the mapping from raw draws to samples is
// done by hand here. Checkpoint and output reproducibility tests pin the
// exact values this class emits.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on (0,1): ((x >> 11) + 0.5) * 2^-53. The half-ulp offset keeps
  // 0 out of the range so log(u) below is always finite.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. The sine branch is cached, so draws come
  // in deterministic pairs.
  double normal();

  // Uniform integer on [0, n), rejection sampled so the distribution is
  // exact and the draw sequence is platform independent.
  uint64_t uniform_index(uint64_t n);

  // Fisher-Yates, backwards, reproducible.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ginn
