#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rsf {

/// Dense channel-major float tensor (channels, height, width).
///
/// Doubles as the image container: an RGB image is a 3-channel tensor with
/// values in [0,1]. Intermediate tensors are unconstrained. Scalars are 1x1x1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, float fill = 0.0f);

  static Tensor scalar(float v) { return Tensor(1, 1, 1, v); }
  static Tensor like(const Tensor& t, float fill = 0.0f) {
    return Tensor(t.channels_, t.height_, t.width_, fill);
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  std::span<float> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }
  float* row(int c, int y) { return data_.data() + index(c, y, 0); }
  const float* row(int c, int y) const { return data_.data() + index(c, y, 0); }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  std::string shape_string() const;

  /// Copy of channel c as a 1-channel tensor.
  Tensor channel(int c) const;
  void set_channel(int c, const Tensor& single);

  bool all_finite() const;
  float max_value() const;
  float min_value() const;
  double mean() const;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

using ImageTensor = Tensor;

/// Throws InvalidInput unless `t` has `channels` channels.
void require_channels(const Tensor& t, int channels, const char* what);
/// Throws InvalidInput unless the shapes agree.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// Clamp every element into [lo, hi].
Tensor clamp(const Tensor& t, float lo, float hi);

/// Mirror padding without edge repeat (… 2 1 | 0 1 2 … n-1 | n-2 …),
/// folded repeatedly so any offset maps into [0, n).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace rsf
