#include "rsf/rsfm.hpp"

#include <algorithm>
#include <cmath>

#include "rsf/color.hpp"
#include "rsf/error.hpp"
#include "rsf/kernels.hpp"

namespace rsf {

void RsfmConfig::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw InvalidConfig("rsfm window must be odd and >= 3, got " + std::to_string(window));
  }
  if (!(threshold_ratio > 0.0 && threshold_ratio < 1.0)) {
    throw InvalidConfig("threshold_ratio must lie in (0,1), got " + std::to_string(threshold_ratio));
  }
  if (!(enhance_gain >= 0.0) || !std::isfinite(enhance_gain)) {
    throw InvalidConfig("enhance_gain must be >= 0, got " + std::to_string(enhance_gain));
  }
}

std::size_t RegionMask::low_count() const {
  return static_cast<std::size_t>(std::count(low_.begin(), low_.end(), std::uint8_t{1}));
}

namespace {

void check_window(int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidConfig("window must be odd, got " + std::to_string(window));
  }
}

}  // namespace

VarianceMap local_variance(const ImageTensor& luma_img, int window) {
  require_channels(luma_img, 1, "local_variance");
  check_window(window);
  // Variance is shift invariant; centring first keeps box(Y^2) - box(Y)^2
  // from cancelling, and makes constant images exactly zero.
  Tensor centred = luma_img;
  const float offset = static_cast<float>(luma_img.mean());
  for (float& v : centred.data()) v -= offset;
  Tensor sq = centred;
  for (float& v : sq.data()) v = v * v;
  const Tensor mean = kernels::box_filter(centred, window);
  const Tensor mean_sq = kernels::box_filter(sq, window);
  VarianceMap f{Tensor::like(luma_img), window};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double m = mean[i];
    f.values[i] = static_cast<float>(std::max(0.0, static_cast<double>(mean_sq[i]) - m * m));
  }
  return f;
}

float region_threshold(const VarianceMap& f, double threshold_ratio) {
  return static_cast<float>(threshold_ratio * f.max());
}

RegionMask mark_regions(const VarianceMap& f, double threshold_ratio) {
  const float t = region_threshold(f, threshold_ratio);
  RegionMask mask(f.values.height(), f.values.width());
  for (std::size_t i = 0; i < mask.size(); ++i) mask.set_low(i, f.values[i] < t);
  return mask;
}

ImageTensor high_pass(const ImageTensor& luma_img, int window) {
  require_channels(luma_img, 1, "high_pass");
  check_window(window);
  const Tensor blur = kernels::box_filter(luma_img, window);
  Tensor out = Tensor::like(luma_img);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = luma_img[i] - blur[i];
  return out;
}

ImageTensor adaptive_enhance(const ImageTensor& high, const VarianceMap& f, const RegionMask& mask,
                             float threshold, double alpha) {
  require_same_shape(high, f.values, "adaptive_enhance");
  if (mask.size() != high.size()) throw InvalidInput("adaptive_enhance: mask size mismatch");
  Tensor out = Tensor::like(high);
  if (!(threshold > 0.0f)) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.is_low(i)) continue;
    const double g = alpha * std::clamp(1.0 - f.values[i] / static_cast<double>(threshold), 0.0, 1.0);
    out[i] = static_cast<float>(g * high[i]);
  }
  return out;
}

FillPlan plan_fill(const ImageTensor& luma_img, const RsfmConfig& cfg) {
  cfg.validate();
  FillPlan plan;
  plan.variance = local_variance(luma_img, cfg.window);
  plan.threshold = region_threshold(plan.variance, cfg.threshold_ratio);
  plan.mask = mark_regions(plan.variance, cfg.threshold_ratio);
  plan.gain = Tensor::like(luma_img);
  const float t = plan.threshold;
  const float fmax = plan.variance.max();
  for (std::size_t i = 0; i < plan.gain.size(); ++i) {
    const double f = plan.variance.values[i];
    double g = 0.0;
    if (cfg.fill == FillRegion::Low) {
      if (plan.mask.is_low(i) && t > 0.0f) g = cfg.enhance_gain * std::clamp(1.0 - f / t, 0.0, 1.0);
    } else {
      if (plan.mask.is_high(i) && fmax > 0.0f) g = cfg.enhance_gain * (f / fmax);
    }
    plan.gain[i] = static_cast<float>(g);
  }
  return plan;
}

ImageTensor rsfm_apply_ycbcr(const ImageTensor& ycbcr, const RsfmConfig& cfg, FillPlan* plan_out) {
  require_channels(ycbcr, 3, "rsfm_apply_ycbcr");
  const Tensor y = ycbcr.channel(0);
  FillPlan plan = plan_fill(y, cfg);
  const Tensor hp = high_pass(y, cfg.window);
  Tensor out = ycbcr;
  auto yy = out.plane(0);
  for (std::size_t i = 0; i < yy.size(); ++i) {
    if (plan.gain[i] != 0.0f) yy[i] = y[i] + plan.gain[i] * hp[i];
  }
  if (plan_out) *plan_out = std::move(plan);
  return out;
}

ImageTensor rsfm_apply(const ImageTensor& rgb, const RsfmConfig& cfg) {
  require_channels(rgb, 3, "rsfm_apply");
  return ycbcr_to_rgb(rsfm_apply_ycbcr(rgb_to_ycbcr(rgb), cfg));
}

ImageTensor circular_shift(const ImageTensor& img, int dy, int dx) {
  Tensor out = Tensor::like(img);
  const int h = img.height(), w = img.width();
  if (h == 0 || w == 0) return out;
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = ((y - dy) % h + h) % h;
      for (int x = 0; x < w; ++x) {
        const int sx = ((x - dx) % w + w) % w;
        out.at(c, y, x) = img.at(c, sy, sx);
      }
    }
  }
  return out;
}

namespace {

ImageTensor concat_channels(const ImageTensor& a, const ImageTensor& b) {
  Tensor out(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
  return out;
}

}  // namespace

ImageTensor pixel_reorganize(const ImageTensor& img) {
  return concat_channels(img, circular_shift(img, 1, 1));
}

ImageTensor pixel_duplicate(const ImageTensor& img) { return concat_channels(img, img); }

}  // namespace rsf
