#include "rsf/error.hpp"
#include "rsf/kernels.hpp"

namespace rsf::kernels::serial {

namespace {

void check_window(int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidConfig("window must be odd and positive, got " + std::to_string(window));
  }
}

void check_conv(const Tensor& in, const Tensor& weight, int k) {
  check_window(k);
  if (weight.height() != k || weight.width() != k || weight.channels() % in.channels() != 0) {
    throw InvalidInput("conv2d: weight " + weight.shape_string() + " incompatible with input " +
                       in.shape_string() + " and kernel " + std::to_string(k));
  }
}

}  // namespace

Tensor box_filter(const Tensor& in, int window) {
  check_window(window);
  const int r = window / 2;
  const double norm = 1.0 / (static_cast<double>(window) * window);
  Tensor out = Tensor::like(in);
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < in.height(); ++y) {
      for (int x = 0; x < in.width(); ++x) {
        double s = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            s += in.at(c, reflect_index(y + dy, in.height()), reflect_index(x + dx, in.width()));
          }
        }
        out.at(c, y, x) = static_cast<float>(s * norm);
      }
    }
  }
  return out;
}

Tensor box_filter_transpose(const Tensor& grad, int window) {
  check_window(window);
  const int r = window / 2;
  const double norm = 1.0 / (static_cast<double>(window) * window);
  std::vector<double> acc(grad.size(), 0.0);
  const int h = grad.height(), w = grad.width();
  for (int c = 0; c < grad.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = grad.at(c, y, x) * norm;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const int sy = reflect_index(y + dy, h), sx = reflect_index(x + dx, w);
            acc[(static_cast<std::size_t>(c) * h + sy) * w + sx] += g;
          }
        }
      }
    }
  }
  Tensor out = Tensor::like(grad);
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i]);
  return out;
}

Tensor conv2d_forward(const Tensor& in, const Tensor& weight, const Tensor& bias, int k) {
  check_conv(in, weight, k);
  const int cin = in.channels();
  const int cout = weight.channels() / cin;
  const int p = k / 2;
  const int h = in.height(), w = in.width();
  Tensor out(cout, h, w);
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = bias[o];
        for (int i = 0; i < cin; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              s += static_cast<double>(weight.at(o * cin + i, ky, kx)) *
                   in.at(i, reflect_index(y + ky - p, h), reflect_index(x + kx - p, w));
            }
          }
        }
        out.at(o, y, x) = static_cast<float>(s);
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& in, const Tensor& weight, const Tensor& grad_out, int k,
                     Tensor* grad_in, Tensor* grad_weight, Tensor* grad_bias) {
  check_conv(in, weight, k);
  const int cin = in.channels();
  const int cout = weight.channels() / cin;
  const int p = k / 2;
  const int h = in.height(), w = in.width();
  std::vector<double> gi(in.size(), 0.0), gw(weight.size(), 0.0), gb(static_cast<std::size_t>(cout), 0.0);
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = grad_out.at(o, y, x);
        gb[o] += g;
        for (int i = 0; i < cin; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int sy = reflect_index(y + ky - p, h), sx = reflect_index(x + kx - p, w);
              const std::size_t widx = (static_cast<std::size_t>(o * cin + i) * k + ky) * k + kx;
              gw[widx] += g * in.at(i, sy, sx);
              gi[(static_cast<std::size_t>(i) * h + sy) * w + sx] += g * weight[widx];
            }
          }
        }
      }
    }
  }
  if (grad_in)
    for (std::size_t j = 0; j < gi.size(); ++j) (*grad_in)[j] += static_cast<float>(gi[j]);
  if (grad_weight)
    for (std::size_t j = 0; j < gw.size(); ++j) (*grad_weight)[j] += static_cast<float>(gw[j]);
  if (grad_bias)
    for (std::size_t j = 0; j < gb.size(); ++j) (*grad_bias)[j] += static_cast<float>(gb[j]);
}

}  // namespace rsf::kernels::serial
