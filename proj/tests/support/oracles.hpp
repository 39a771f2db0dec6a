#pragma once

// Brute-force reference computations used only by tests. Nothing here calls
// into the library's filtering or metric code.

#include <cmath>
#include <functional>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf::testing {

inline int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// Direct sliding-window variance of a 1-channel image in double.
inline std::vector<double> brute_local_variance(const Tensor& img, int window) {
  const int r = window / 2, h = img.height(), w = img.width();
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      std::vector<double> vals;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) vals.push_back(img.at(0, mirror(y + dy, h), mirror(x + dx, w)));
      double m = 0.0;
      for (double v : vals) m += v;
      m /= vals.size();
      double var = 0.0;
      for (double v : vals) var += (v - m) * (v - m);
      out[static_cast<std::size_t>(y) * w + x] = var / vals.size();
    }
  return out;
}

/// Direct box blur in double.
inline std::vector<double> brute_box(const Tensor& img, int window) {
  const int r = window / 2, h = img.height(), w = img.width();
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) s += img.at(0, mirror(y + dy, h), mirror(x + dx, w));
      out[static_cast<std::size_t>(y) * w + x] = s / (window * window);
    }
  return out;
}

inline double brute_psnr(const Tensor& a, const Tensor& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
    acc += d * d;
  }
  const double m = static_cast<double>(acc / a.size());
  if (m < 1e-10) return 99.0;
  return 10.0 * std::log10(1.0 / m);
}

/// Textbook SSIM: 2-D Gaussian window (11x11, sigma 1.5) evaluated directly
/// at each valid position, luma via 0.299/0.587/0.114.
inline double brute_ssim(const Tensor& a, const Tensor& b) {
  auto gray = [](const Tensor& t, int y, int x) -> double {
    if (t.channels() == 1) return t.at(0, y, x);
    return 0.299 * t.at(0, y, x) + 0.587 * t.at(1, y, x) + 0.114 * t.at(2, y, x);
  };
  const int win = 11, r = 5;
  double kernel[11][11];
  double ksum = 0.0;
  for (int i = 0; i < win; ++i)
    for (int j = 0; j < win; ++j) {
      kernel[i][j] = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / (2.0 * 1.5 * 1.5));
      ksum += kernel[i][j];
    }
  const double c1 = 0.0001, c2 = 0.0009;
  double total = 0.0;
  int count = 0;
  for (int y = 0; y + win <= a.height(); ++y)
    for (int x = 0; x + win <= a.width(); ++x) {
      double mx = 0, my = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double k = kernel[i][j] / ksum;
          mx += k * gray(a, y + i, x + j);
          my += k * gray(b, y + i, x + j);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double k = kernel[i][j] / ksum;
          const double dx = gray(a, y + i, x + j) - mx;
          const double dy = gray(b, y + i, x + j) - my;
          vx += k * dx * dx;
          vy += k * dy * dy;
          cxy += k * dx * dy;
        }
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

/// |a - n| / max(|a|, |n|, floor).
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct FdResult {
  double analytic = 0.0;
  double numeric = 0.0;
  double rel = 0.0;
};

/// Central difference of f along direction u at x with step h, compared with
/// <grad, u>. Both sides use the float-representable perturbation actually applied.
inline FdResult directional_check(const std::function<double(const Tensor&)>& f, const Tensor& grad, const Tensor& x,
                                  const Tensor& u, double h) {
  Tensor xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = static_cast<float>(x[i] + h * u[i]);
    xm[i] = static_cast<float>(x[i] - h * u[i]);
  }
  double analytic = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    analytic += static_cast<double>(grad[i]) * (static_cast<double>(xp[i]) - static_cast<double>(xm[i]));
  const double numeric = f(xp) - f(xm);
  // Both sides are scaled by 2h.
  return {analytic / (2 * h), numeric / (2 * h), rel_error(analytic, numeric, 1e-12)};
}

inline double coordinate_fd(const std::function<double(const Tensor&)>& f, const Tensor& x, std::size_t i, double h) {
  Tensor xp = x, xm = x;
  xp[i] += static_cast<float>(h);
  xm[i] -= static_cast<float>(h);
  // Use the actually representable step.
  const double step = static_cast<double>(xp[i]) - static_cast<double>(xm[i]);
  return (f(xp) - f(xm)) / step;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

}  // namespace rsf::testing
