#pragma once

#include <cstdint>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf {

/// Which side of the variance threshold receives the high-frequency fill.
/// `Low` is the method; `High` exists for the filling ablation.
enum class FillRegion { Low, High };

struct RsfmConfig {
  int window = 7;                // variance / high-pass window, odd, >= 3
  double threshold_ratio = 0.2;  // T = ratio * max(F)
  double enhance_gain = 1.0;     // alpha
  FillRegion fill = FillRegion::Low;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Per-pixel local variance of luma: box(Y^2) - box(Y)^2, clamped at 0.
struct VarianceMap {
  Tensor values;  // 1 channel
  int window = 0;

  float max() const { return values.empty() ? 0.0f : values.max_value(); }
};

/// Low/high partition of the pixel grid. Only `low` is stored, so the two
/// sides partition the grid by construction.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(int height, int width) : height_(height), width_(width), low_(std::size_t(height) * width, 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return low_.size(); }

  bool is_low(std::size_t i) const { return low_[i] != 0; }
  bool is_high(std::size_t i) const { return low_[i] == 0; }
  void set_low(std::size_t i, bool v) { low_[i] = v ? 1 : 0; }
  std::size_t low_count() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> low_;
};

VarianceMap local_variance(const ImageTensor& luma, int window);

/// T = ratio * max(F).
float region_threshold(const VarianceMap& f, double threshold_ratio);

/// low = {F < T}; F == T counts as high, so F == 0 everywhere marks nothing low.
RegionMask mark_regions(const VarianceMap& f, double threshold_ratio);

/// Y - box(Y).
ImageTensor high_pass(const ImageTensor& luma, int window);

/// alpha * clamp(1 - F/T, 0, 1) * H on the low region, 0 elsewhere.
ImageTensor adaptive_enhance(const ImageTensor& high, const VarianceMap& f, const RegionMask& mask,
                             float threshold, double alpha);

/// Everything the fill needs that is derived from forward values only:
/// the variance map, its partition and the per-pixel gain. The
/// differentiable path treats `gain` as a constant.
struct FillPlan {
  VarianceMap variance;
  RegionMask mask;
  float threshold = 0.0f;
  Tensor gain;  // 1 channel
};

/// Gain law: Low fill uses alpha*(1 - F/T) below T; High fill (ablation)
/// uses alpha*F/max(F) at or above T.
FillPlan plan_fill(const ImageTensor& luma, const RsfmConfig& cfg);

/// Luma of a 3-channel YCbCr tensor gets gain * high_pass(Y) added; chroma is untouched.
/// No clamping, so callers can inspect exactly which pixels changed.
ImageTensor rsfm_apply_ycbcr(const ImageTensor& ycbcr, const RsfmConfig& cfg, FillPlan* plan_out = nullptr);

/// RGB -> YCbCr -> fill -> RGB, clamped to [0,1].
ImageTensor rsfm_apply(const ImageTensor& rgb, const RsfmConfig& cfg);

/// Circular shift: out(y, x) = in(y - dy, x - dx).
ImageTensor circular_shift(const ImageTensor& img, int dy, int dx);

/// Channels [0, C) are the input; channels [C, 2C) are the input shifted one
/// pixel down and then one pixel right (circularly).
ImageTensor pixel_reorganize(const ImageTensor& img);

/// Reorganization ablation: plain channel duplication.
ImageTensor pixel_duplicate(const ImageTensor& img);

}  // namespace rsf
