#pragma once

#include <cstdint>

#include "rsf/tensor.hpp"

namespace rsf {

/// SplitMix64 (Steele, Lea & Flood 2014): the state advances by the golden
/// gamma 0x9E3779B97F4A7C15 and each output is the state passed through the
/// MurmurHash3-style finalizer. Output k of seed s is a pure function of
/// s + (k+1)*gamma, so sequences are identical on every platform.
///
/// uniform() takes the top 53 bits. normal() is the Box-Muller cosine branch
/// on two consecutive uniforms (the first mapped into (0,1]).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  Tensor normal_tensor(int channels, int height, int width);
  Tensor uniform_tensor(int channels, int height, int width, double lo, double hi);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace rsf
