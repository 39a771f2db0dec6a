#include <algorithm>
#include <vector>

#include "rsf/error.hpp"
#include "rsf/kernels.hpp"

namespace rsf::kernels::omp {

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

// Adds e[j] onto out[reflect(j - r)] for a padded line of n + 2r entries.
template <typename T, typename U>
void fold_line(const T* e, int n, int r, U* out) {
  for (int j = 0; j < n + 2 * r; ++j) out[reflect_index(j - r, n)] += static_cast<U>(e[j]);
}

// Transposed 1-D box: e[j] = norm * sum of g[x] for x in [j - 2r, j] ∩ [0, n).
void scatter_line(const double* g, int n, int r, double norm, double* e) {
  const int window = 2 * r + 1;
  double s = 0.0;
  for (int j = 0; j < n + 2 * r; ++j) {
    if (j < n) s += g[j];
    if (j - window >= 0 && j - window < n) s -= g[j - window];
    e[j] = s * norm;
  }
}

}  // namespace

Tensor reflect_pad(const Tensor& in, int pad) {
  const int h = in.height(), w = in.width();
  const int ph = h + 2 * pad, pw = w + 2 * pad;
  Tensor out(in.channels(), ph, pw);
  const int rows = in.channels() * ph;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < rows; ++idx) {
    const int c = idx / ph, py = idx % ph;
    const float* src = in.row(c, reflect_index(py - pad, h));
    float* dst = out.row(c, py);
    for (int px = 0; px < pad; ++px) dst[px] = src[reflect_index(px - pad, w)];
    for (int x = 0; x < w; ++x) dst[pad + x] = src[x];
    for (int px = pad + w; px < pw; ++px) dst[px] = src[reflect_index(px - pad, w)];
  }
  return out;
}

Tensor reflect_fold(const Tensor& padded, int pad, int height, int width) {
  Tensor out(padded.channels(), height, width);
  const int ph = padded.height();
  const int rows = padded.channels() * height;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < rows; ++idx) {
    const int c = idx / height, y = idx % height;
    float* dst = out.row(c, y);
    for (int py = 0; py < ph; ++py) {
      if (reflect_index(py - pad, height) != y) continue;
      fold_line(padded.row(c, py), width, pad, dst);
    }
  }
  return out;
}

Tensor box_filter(const Tensor& in, int window) {
  check_window(window);
  const int r = window / 2;
  const int h = in.height(), w = in.width();
  const double norm = 1.0 / window;
  Tensor out = Tensor::like(in);
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < in.channels(); ++c) {
#pragma omp parallel
    {
      std::vector<double> line(static_cast<std::size_t>(w + 2 * r));
#pragma omp for schedule(static)
      for (int y = 0; y < h; ++y) {
        const float* src = in.row(c, y);
        for (int j = 0; j < w + 2 * r; ++j) line[j] = src[reflect_index(j - r, w)];
        double s = 0.0;
        for (int j = 0; j < window; ++j) s += line[j];
        double* trow = tmp.data() + static_cast<std::size_t>(y) * w;
        trow[0] = s * norm;
        for (int x = 1; x < w; ++x) {
          s += line[x + window - 1] - line[x - 1];
          trow[x] = s * norm;
        }
      }
    }
#pragma omp parallel
    {
      std::vector<double> acc(static_cast<std::size_t>(w));
#pragma omp for schedule(static)
      for (int y = 0; y < h; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int d = -r; d <= r; ++d) {
          const double* trow = tmp.data() + static_cast<std::size_t>(reflect_index(y + d, h)) * w;
          for (int x = 0; x < w; ++x) acc[x] += trow[x];
        }
        float* dst = out.row(c, y);
        for (int x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x] * norm);
      }
    }
  }
  return out;
}

Tensor box_filter_transpose(const Tensor& grad, int window) {
  check_window(window);
  const int r = window / 2;
  const int h = grad.height(), w = grad.width();
  const int ph = h + 2 * r;
  const double norm = 1.0 / window;
  Tensor out = Tensor::like(grad);
  // Forward is vertical(horizontal(x)); the adjoint runs vertical^T first.
  std::vector<double> padded_rows(static_cast<std::size_t>(ph) * w);
  std::vector<double> vt(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < grad.channels(); ++c) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ph; ++j) {
      double* e = padded_rows.data() + static_cast<std::size_t>(j) * w;
      std::fill(e, e + w, 0.0);
      for (int y = std::max(0, j - 2 * r); y <= std::min(h - 1, j); ++y) {
        const float* g = grad.row(c, y);
        for (int x = 0; x < w; ++x) e[x] += g[x];
      }
      for (int x = 0; x < w; ++x) e[x] *= norm;
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      double* dst = vt.data() + static_cast<std::size_t>(y) * w;
      std::fill(dst, dst + w, 0.0);
      for (int j = 0; j < ph; ++j) {
        if (reflect_index(j - r, h) != y) continue;
        const double* e = padded_rows.data() + static_cast<std::size_t>(j) * w;
        for (int x = 0; x < w; ++x) dst[x] += e[x];
      }
    }
#pragma omp parallel
    {
      std::vector<double> e(static_cast<std::size_t>(w + 2 * r));
      std::vector<double> acc(static_cast<std::size_t>(w));
#pragma omp for schedule(static)
      for (int y = 0; y < h; ++y) {
        scatter_line(vt.data() + static_cast<std::size_t>(y) * w, w, r, norm, e.data());
        std::fill(acc.begin(), acc.end(), 0.0);
        fold_line(e.data(), w, r, acc.data());
        float* dst = out.row(c, y);
        for (int x = 0; x < w; ++x) dst[x] = static_cast<float>(acc[x]);
      }
    }
  }
  return out;
}

Tensor conv2d_forward(const Tensor& in, const Tensor& weight, const Tensor& bias, int k) {
  check_conv(in, weight, k);
  const int cin = in.channels();
  const int cout = weight.channels() / cin;
  const int p = k / 2;
  const int h = in.height(), w = in.width();
  const Tensor padded = p > 0 ? reflect_pad(in, p) : in;
  Tensor out(cout, h, w);
  const int rows = cout * h;
#pragma omp parallel for schedule(static)
  for (int idx = 0; idx < rows; ++idx) {
    const int o = idx / h, y = idx % h;
    float* dst = out.row(o, y);
    const float b = bias[o];
    for (int x = 0; x < w; ++x) dst[x] = b;
    for (int i = 0; i < cin; ++i) {
      for (int ky = 0; ky < k; ++ky) {
        const float* src = padded.row(i, y + ky);
        const float* wrow = weight.row(o * cin + i, ky);
        for (int kx = 0; kx < k; ++kx) {
          const float wv = wrow[kx];
          const float* s = src + kx;
#pragma omp simd
          for (int x = 0; x < w; ++x) dst[x] += wv * s[x];
        }
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
  const int ph = h + 2 * p, pw = w + 2 * p;

  if (grad_in) {
    Tensor gpad(cin, ph, pw);
    const int rows = cin * ph;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < rows; ++idx) {
      const int i = idx / ph, py = idx % ph;
      float* dst = gpad.row(i, py);
      for (int o = 0; o < cout; ++o) {
        for (int ky = 0; ky < k; ++ky) {
          const int y = py - ky;
          if (y < 0 || y >= h) continue;
          const float* g = grad_out.row(o, y);
          const float* wrow = weight.row(o * cin + i, ky);
          for (int kx = 0; kx < k; ++kx) {
            const float wv = wrow[kx];
            float* d = dst + kx;
#pragma omp simd
            for (int x = 0; x < w; ++x) d[x] += wv * g[x];
          }
        }
      }
    }
    const Tensor folded = p > 0 ? reflect_fold(gpad, p, h, w) : gpad;
    for (std::size_t j = 0; j < folded.size(); ++j) (*grad_in)[j] += folded[j];
  }

  if (grad_weight) {
    const Tensor padded = p > 0 ? reflect_pad(in, p) : in;
    const int items = cout * cin * k;
#pragma omp parallel for schedule(static)
    for (int idx = 0; idx < items; ++idx) {
      const int ky = idx % k;
      const int oi = idx / k;
      const int o = oi / cin, i = oi % cin;
      for (int kx = 0; kx < k; ++kx) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y) {
          const float* g = grad_out.row(o, y);
          const float* s = padded.row(i, y + ky) + kx;
          float partial = 0.0f;
#pragma omp simd reduction(+ : partial)
          for (int x = 0; x < w; ++x) partial += g[x] * s[x];
          acc += partial;
        }
        grad_weight->at(o * cin + i, ky, kx) += static_cast<float>(acc);
      }
    }
  }

  if (grad_bias) {
    for (int o = 0; o < cout; ++o) {
      double acc = 0.0;
      for (float v : grad_out.plane(o)) acc += v;
      (*grad_bias)[o] += static_cast<float>(acc);
    }
  }
}

}  // namespace rsf::kernels::omp
