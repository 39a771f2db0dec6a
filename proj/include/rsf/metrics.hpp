#pragma once

#include "rsf/tensor.hpp"

namespace rsf {

inline constexpr double kPsnrCap = 99.0;

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double wall_time = 0.0;  // seconds
};

/// Mean squared error over all elements, accumulated in double.
double mse(const ImageTensor& a, const ImageTensor& b);

/// 10 log10(1 / MSE) for peak 1.0; capped at kPsnrCap when MSE < 1e-10.
double psnr(const ImageTensor& a, const ImageTensor& b);

/// Mean SSIM over the valid region of an 11x11 Gaussian window (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2. Multi-channel input is reduced to BT.601 luma first.
double ssim(const ImageTensor& a, const ImageTensor& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

}  // namespace rsf
