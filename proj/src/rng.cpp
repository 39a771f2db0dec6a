#include "rsf/rng.hpp"

#include <cmath>
#include <numbers>

namespace rsf {

double Rng::normal() {
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor Rng::normal_tensor(int channels, int height, int width) {
  Tensor t(channels, height, width);
  for (float& v : t.data()) v = static_cast<float>(normal());
  return t;
}

Tensor Rng::uniform_tensor(int channels, int height, int width, double lo, double hi) {
  Tensor t(channels, height, width);
  for (float& v : t.data()) v = static_cast<float>(uniform(lo, hi));
  return t;
}

}  // namespace rsf
