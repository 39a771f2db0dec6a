#pragma once

// Procedural stand-ins for endoscopic frames: reddish tissue with multi-scale
// texture and a few thin dark vessels. Deterministic in the seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rsf/rng.hpp"
#include "rsf/tensor.hpp"

namespace rsf::testing {

inline Tensor value_noise(int size, int cells, Rng& rng) {
  std::vector<double> grid(static_cast<std::size_t>(cells + 1) * (cells + 1));
  for (double& g : grid) g = rng.uniform();
  Tensor out(1, size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double gy = static_cast<double>(y) * cells / size, gx = static_cast<double>(x) * cells / size;
      const int iy = static_cast<int>(gy), ix = static_cast<int>(gx);
      double fy = gy - iy, fx = gx - ix;
      fy = fy * fy * (3 - 2 * fy);
      fx = fx * fx * (3 - 2 * fx);
      auto at = [&](int a, int b) { return grid[static_cast<std::size_t>(a) * (cells + 1) + b]; };
      const double v = (1 - fy) * ((1 - fx) * at(iy, ix) + fx * at(iy, ix + 1)) +
                       fy * ((1 - fx) * at(iy + 1, ix) + fx * at(iy + 1, ix + 1));
      out.at(0, y, x) = static_cast<float>(v);
    }
  return out;
}

inline Tensor tissue_image(int size, std::uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  const double base_r = rng.uniform(0.55, 0.85);
  const double base_g = rng.uniform(0.18, 0.38);
  const double base_b = rng.uniform(0.12, 0.32);
  Tensor field(1, size, size);
  double amp = 0.5;
  for (int cells = 4; cells <= size / 2 && cells <= 64; cells *= 2, amp *= 0.55) {
    const Tensor n = value_noise(size, cells, rng);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] += static_cast<float>(amp * (n[i] - 0.5));
  }
  // Vessels: sinusoidal curves with a narrow dark profile.
  Tensor vessel(1, size, size);
  const int count = 3 + static_cast<int>(rng.uniform() * 3);
  for (int k = 0; k < count; ++k) {
    const double y0 = rng.uniform(0.1, 0.9) * size;
    const double ampl = rng.uniform(0.05, 0.2) * size;
    const double freq = rng.uniform(1.0, 3.0) * 2.0 * 3.141592653589793 / size;
    const double phase = rng.uniform(0.0, 6.28);
    const double width = rng.uniform(0.6, 1.8) * size / 128.0 + 0.5;
    const bool vertical = rng.uniform() < 0.5;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double u = vertical ? y : x, v = vertical ? x : y;
        const double d = std::abs(v - (y0 + ampl * std::sin(freq * u + phase)));
        const double s = std::exp(-(d * d) / (2 * width * width));
        vessel.at(0, y, x) = std::max(vessel.at(0, y, x), static_cast<float>(s));
      }
  }
  Tensor img(3, size, size);
  const double base[3] = {base_r, base_g, base_b};
  const double vessel_tint[3] = {0.45, 0.08, 0.10};
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double shade = 1.0 + 0.9 * field.at(0, y, x);
        const double t = vessel.at(0, y, x);
        const double v = (1 - t) * base[c] * shade + t * vessel_tint[c];
        img.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
  return img;
}

inline Tensor random_image(int channels, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  return rng.uniform_tensor(channels, h, w, 0.0, 1.0);
}

}  // namespace rsf::testing
