#include "rsf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf {

Tensor::Tensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) {
    throw InvalidInput("negative tensor dimension");
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << channels_ << "x" << height_ << "x" << width_;
  return os.str();
}

Tensor Tensor::channel(int c) const {
  Tensor out(1, height_, width_);
  auto src = plane(c);
  std::copy(src.begin(), src.end(), out.data().begin());
  return out;
}

void Tensor::set_channel(int c, const Tensor& single) {
  if (single.channels() != 1 || single.height() != height_ || single.width() != width_) {
    throw InvalidInput("set_channel: expected 1x" + std::to_string(height_) + "x" +
                       std::to_string(width_) + ", got " + single.shape_string());
  }
  std::copy(single.data().begin(), single.data().end(), plane(c).begin());
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float Tensor::max_value() const { return *std::max_element(data_.begin(), data_.end()); }
float Tensor::min_value() const { return *std::min_element(data_.begin(), data_.end()); }

double Tensor::mean() const {
  if (data_.empty()) return 0.0;
  double s = 0.0;
  for (float v : data_) s += v;
  return s / static_cast<double>(data_.size());
}

void require_channels(const Tensor& t, int channels, const char* what) {
  if (t.channels() != channels) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(channels) +
                       " channels, got " + std::to_string(t.channels()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidInput(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                       b.shape_string());
  }
}

Tensor clamp(const Tensor& t, float lo, float hi) {
  Tensor out = t;
  for (float& v : out.data()) v = std::clamp(v, lo, hi);
  return out;
}

}  // namespace rsf
