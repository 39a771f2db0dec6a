#include "rsf/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "rsf/color.hpp"
#include "rsf/error.hpp"

namespace rsf {

double mse(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "mse");
  if (a.empty()) throw InvalidInput("mse: empty image");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const ImageTensor& a, const ImageTensor& b) {
  const double m = mse(a, b);
  if (m < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> w{};
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    w[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable Gaussian over the valid region; `src` is h x w, result (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::array<double, kSsimWindow>& taps) {
  const int oh = h - kSsimWindow + 1;
  const int ow = w - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[k] * row[x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    double* orow = out.data() + static_cast<std::size_t>(y) * ow;
    for (int k = 0; k < kSsimWindow; ++k) {
      const double* trow = tmp.data() + static_cast<std::size_t>(y + k) * ow;
      for (int x = 0; x < ow; ++x) orow[x] += taps[k] * trow[x];
    }
  }
  return out;
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw InvalidInput("ssim: image " + a.shape_string() + " smaller than the 11x11 window");
  }
  const ImageTensor la = luma(a);
  const ImageTensor lb = luma(b);
  const int h = a.height(), w = a.width();
  const std::size_t n = la.size();

  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = la[i];
    y[i] = lb[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto taps = gaussian_taps();
  const auto mx = filter_valid(x, h, w, taps);
  const auto my = filter_valid(y, h, w, taps);
  const auto mxx = filter_valid(xx, h, w, taps);
  const auto myy = filter_valid(yy, h, w, taps);
  const auto mxy = filter_valid(xy, h, w, taps);

  double acc = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cxy = mxy[i] - mx[i] * my[i];
    const double num = (2.0 * mx[i] * my[i] + kSsimC1) * (2.0 * cxy + kSsimC2);
    const double den = (mx[i] * mx[i] + my[i] * my[i] + kSsimC1) * (vx + vy + kSsimC2);
    acc += num / den;
  }
  return acc / static_cast<double>(mx.size());
}

}  // namespace rsf
