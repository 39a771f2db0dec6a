#include <algorithm>
#include <cmath>
#include <vector>

#include "rsf/color.hpp"
#include "rsf/error.hpp"
#include "rsf/graph.hpp"
#include "rsf/kernels.hpp"
#include "rsf/rsfm.hpp"

namespace rsf::ad {

namespace {

Graph& graph_of(Var v) {
  if (!v.graph) throw InvalidInput("ad: unbound Var");
  return *v.graph;
}

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out = Tensor::like(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void check_same(Var a, Var b, const char* what) {
  if (a.graph != b.graph) throw InvalidInput(std::string(what) + ": operands from different graphs");
  require_same_shape(graph_of(a).value(a), graph_of(b).value(b), what);
}

// Index of the max / min channel per pixel; first wins on ties.
int argmax3(float r, float g, float b) { return (r >= g && r >= b) ? 0 : (g >= b ? 1 : 2); }
int argmin3(float r, float g, float b) { return (r <= g && r <= b) ? 0 : (g <= b ? 1 : 2); }

}  // namespace

Var add(Var a, Var b) {
  check_same(a, b, "add");
  Graph& g = graph_of(a);
  Tensor out = g.value(a);
  const Tensor& y = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& go, const Tensor&) {
    for (Var v : {a, b})
      if (Tensor* s = gr.grad_sink(v))
        for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i];
  });
}

Var sub(Var a, Var b) {
  check_same(a, b, "sub");
  Graph& g = graph_of(a);
  Tensor out = g.value(a);
  const Tensor& y = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& go, const Tensor&) {
    if (Tensor* s = gr.grad_sink(a))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i];
    if (Tensor* s = gr.grad_sink(b))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] -= go[i];
  });
}

Var mul(Var a, Var b) {
  check_same(a, b, "mul");
  Graph& g = graph_of(a);
  Tensor out = g.value(a);
  const Tensor& y = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return g.emit(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& go, const Tensor&) {
    const Tensor& x = gr.value(a);
    const Tensor& y = gr.value(b);
    if (Tensor* s = gr.grad_sink(a))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * y[i];
    if (Tensor* s = gr.grad_sink(b))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * x[i];
  });
}

Var scale(Var a, float k) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [k](float v) { return v * k; }), {a},
                [a, k](Graph& gr, const Tensor& go, const Tensor&) {
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * k;
                });
}

Var add_scalar(Var a, float k) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [k](float v) { return v + k; }), {a},
                [a](Graph& gr, const Tensor& go, const Tensor&) {
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i];
                });
}

Var exp(Var a) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [](float v) { return std::exp(v); }), {a},
                [a](Graph& gr, const Tensor& go, const Tensor& out) {
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * out[i];
                });
}

Var mul_const(Var a, const Tensor& c) {
  Graph& g = graph_of(a);
  require_same_shape(g.value(a), c, "mul_const");
  Tensor out = g.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c[i];
  return g.emit(std::move(out), {a}, [a, c](Graph& gr, const Tensor& go, const Tensor&) {
    if (Tensor* s = gr.grad_sink(a))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * c[i];
  });
}

Var mean(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  if (x.empty()) throw InvalidInput("mean: empty tensor");
  double s = 0.0;
  for (float v : x.data()) s += v;
  const double n = static_cast<double>(x.size());
  return g.emit(Tensor::scalar(static_cast<float>(s / n)), {a},
                [a, n](Graph& gr, const Tensor& go, const Tensor&) {
                  if (Tensor* sk = gr.grad_sink(a)) {
                    const float d = static_cast<float>(go[0] / n);
                    for (float& v : sk->data()) v += d;
                  }
                });
}

Var weighted_sum(std::initializer_list<std::pair<float, Var>> terms) {
  if (terms.size() == 0) throw InvalidInput("weighted_sum: no terms");
  std::vector<std::pair<float, Var>> items(terms);
  Graph& g = graph_of(items.front().second);
  std::vector<Var> inputs;
  double s = 0.0;
  for (const auto& [w, v] : items) {
    if (v.graph != &g) throw InvalidInput("weighted_sum: terms from different graphs");
    if (g.value(v).size() != 1) throw InvalidInput("weighted_sum: terms must be scalars");
    s += static_cast<double>(w) * g.value(v)[0];
    inputs.push_back(v);
  }
  return g.emit(Tensor::scalar(static_cast<float>(s)), inputs,
                [items](Graph& gr, const Tensor& go, const Tensor&) {
                  for (const auto& [w, v] : items)
                    if (Tensor* sk = gr.grad_sink(v)) (*sk)[0] += go[0] * w;
                });
}

Var sigmoid(Var a) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [](float v) { return 1.0f / (1.0f + std::exp(-v)); }), {a},
                [a](Graph& gr, const Tensor& go, const Tensor& out) {
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * out[i] * (1.0f - out[i]);
                });
}

Var leaky_relu(Var a, float slope) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [slope](float v) { return v > 0.0f ? v : slope * v; }), {a},
                [a, slope](Graph& gr, const Tensor& go, const Tensor&) {
                  const Tensor& x = gr.value(a);
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * (x[i] > 0.0f ? 1.0f : slope);
                });
}

Var clamp(Var a, float lo, float hi) {
  Graph& g = graph_of(a);
  return g.emit(map(g.value(a), [lo, hi](float v) { return std::clamp(v, lo, hi); }), {a},
                [a, lo, hi](Graph& gr, const Tensor& go, const Tensor&) {
                  const Tensor& x = gr.value(a);
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < go.size(); ++i)
                      if (x[i] >= lo && x[i] <= hi) (*s)[i] += go[i];
                });
}

Var avg_pool2(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  if (x.height() % 2 != 0 || x.width() % 2 != 0) {
    throw InvalidInput("avg_pool2: height and width must be even, got " + x.shape_string());
  }
  const int oh = x.height() / 2, ow = x.width() / 2;
  Tensor out(x.channels(), oh, ow);
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < oh; ++y)
      for (int xx = 0; xx < ow; ++xx)
        out.at(c, y, xx) = 0.25f * (x.at(c, 2 * y, 2 * xx) + x.at(c, 2 * y, 2 * xx + 1) +
                                    x.at(c, 2 * y + 1, 2 * xx) + x.at(c, 2 * y + 1, 2 * xx + 1));
  return g.emit(std::move(out), {a}, [a](Graph& gr, const Tensor& go, const Tensor&) {
    Tensor* s = gr.grad_sink(a);
    if (!s) return;
    for (int c = 0; c < go.channels(); ++c)
      for (int y = 0; y < go.height(); ++y)
        for (int x = 0; x < go.width(); ++x) {
          const float d = 0.25f * go.at(c, y, x);
          s->at(c, 2 * y, 2 * x) += d;
          s->at(c, 2 * y, 2 * x + 1) += d;
          s->at(c, 2 * y + 1, 2 * x) += d;
          s->at(c, 2 * y + 1, 2 * x + 1) += d;
        }
  });
}

Var upsample_nearest2(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  Tensor out(x.channels(), x.height() * 2, x.width() * 2);
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int xx = 0; xx < out.width(); ++xx) out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
  return g.emit(std::move(out), {a}, [a](Graph& gr, const Tensor& go, const Tensor&) {
    Tensor* s = gr.grad_sink(a);
    if (!s) return;
    for (int c = 0; c < go.channels(); ++c)
      for (int y = 0; y < go.height(); ++y)
        for (int x = 0; x < go.width(); ++x) s->at(c, y / 2, x / 2) += go.at(c, y, x);
  });
}

Var conv2d(Var x, Var weight, Var bias, int k) {
  Graph& g = graph_of(x);
  const Tensor& in = g.value(x);
  const Tensor& w = g.value(weight);
  const Tensor& b = g.value(bias);
  if (w.channels() % std::max(1, in.channels()) != 0 || b.size() * in.channels() != static_cast<std::size_t>(w.channels())) {
    throw InvalidInput("conv2d: input " + in.shape_string() + " does not match weight " + w.shape_string() +
                       " / bias " + b.shape_string());
  }
  return g.emit(kernels::conv2d_forward(in, w, b, k), {x, weight, bias},
                [x, weight, bias, k](Graph& gr, const Tensor& go, const Tensor&) {
                  kernels::conv2d_backward(gr.value(x), gr.value(weight), go, k, gr.grad_sink(x),
                                           gr.grad_sink(weight), gr.grad_sink(bias));
                });
}

Var reorganize(Var x, bool shift) {
  Graph& g = graph_of(x);
  const Tensor& in = g.value(x);
  const int c = in.channels();
  return g.emit(shift ? pixel_reorganize(in) : pixel_duplicate(in), {x},
                [x, c, shift](Graph& gr, const Tensor& go, const Tensor&) {
                  Tensor* s = gr.grad_sink(x);
                  if (!s) return;
                  const std::size_t n = s->size();
                  Tensor tail(c, go.height(), go.width());
                  std::copy(go.data().begin() + static_cast<std::ptrdiff_t>(n), go.data().end(), tail.data().begin());
                  if (shift) tail = circular_shift(tail, -1, -1);
                  for (std::size_t i = 0; i < n; ++i) (*s)[i] += go[i] + tail[i];
                });
}

Var rgb_to_ycbcr(Var rgb) {
  Graph& g = graph_of(rgb);
  return g.emit(rsf::rgb_to_ycbcr(g.value(rgb)), {rgb}, [rgb](Graph& gr, const Tensor& go, const Tensor&) {
    Tensor* s = gr.grad_sink(rgb);
    if (!s) return;
    const std::size_t n = go.plane_size();
    const float a = kLumaR, b = kLumaG, c = kLumaB, sb = kCbScale, sr = kCrScale;
    for (std::size_t i = 0; i < n; ++i) {
      const float gy = go[i], gcb = go[n + i], gcr = go[2 * n + i];
      (*s)[i] += gy * a - gcb * sb * a + gcr * sr * (1.0f - a);
      (*s)[n + i] += gy * b - gcb * sb * b - gcr * sr * b;
      (*s)[2 * n + i] += gy * c + gcb * sb * (1.0f - c) - gcr * sr * c;
    }
  });
}

Var ycbcr_to_rgb(Var ycbcr) {
  Graph& g = graph_of(ycbcr);
  return g.emit(rsf::ycbcr_to_rgb_unclamped(g.value(ycbcr)), {ycbcr},
                [ycbcr](Graph& gr, const Tensor& go, const Tensor&) {
                  Tensor* s = gr.grad_sink(ycbcr);
                  if (!s) return;
                  const std::size_t n = go.plane_size();
                  const float a = kLumaR, b = kLumaG, c = kLumaB, sb = kCbScale, sr = kCrScale;
                  for (std::size_t i = 0; i < n; ++i) {
                    const float gr_ = go[i], gg = go[n + i], gb = go[2 * n + i];
                    (*s)[i] += gr_ + gg * (1.0f - a - c) / b + gb;
                    (*s)[n + i] += gb / sb - gg * c / (b * sb);
                    (*s)[2 * n + i] += gr_ / sr - gg * a / (b * sr);
                  }
                });
}

Var highpass_fill(Var x, const Tensor& gain, int window, int source_channel,
                  std::initializer_list<int> target_channels) {
  Graph& g = graph_of(x);
  const Tensor& in = g.value(x);
  if (gain.channels() != 1 || gain.height() != in.height() || gain.width() != in.width()) {
    throw InvalidInput("highpass_fill: gain " + gain.shape_string() + " does not match " + in.shape_string());
  }
  if (source_channel < 0 || source_channel >= in.channels()) throw InvalidInput("highpass_fill: bad source channel");
  std::vector<int> targets(target_channels);
  for (int t : targets)
    if (t < 0 || t >= in.channels()) throw InvalidInput("highpass_fill: bad target channel");

  const Tensor src = in.channel(source_channel);
  const Tensor blur = kernels::box_filter(src, window);
  Tensor out = in;
  const std::size_t n = in.plane_size();
  for (int t : targets) {
    for (std::size_t i = 0; i < n; ++i) {
      if (gain[i] != 0.0f) out[t * n + i] = in[t * n + i] + gain[i] * (src[i] - blur[i]);
    }
  }
  return g.emit(std::move(out), {x},
                [x, gain, window, source_channel, targets](Graph& gr, const Tensor& go, const Tensor&) {
                  Tensor* s = gr.grad_sink(x);
                  if (!s) return;
                  for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i];
                  const std::size_t n = go.plane_size();
                  Tensor q(1, go.height(), go.width());
                  for (int t : targets)
                    for (std::size_t i = 0; i < n; ++i) q[i] += gain[i] * go[t * n + i];
                  const Tensor qt = kernels::box_filter_transpose(q, window);
                  for (std::size_t i = 0; i < n; ++i) (*s)[source_channel * n + i] += q[i] - qt[i];
                });
}

Var hsv_value(Var rgb) {
  Graph& g = graph_of(rgb);
  const Tensor& x = g.value(rgb);
  require_channels(x, 3, "hsv_value");
  return g.emit(brightness(x), {rgb}, [rgb](Graph& gr, const Tensor& go, const Tensor&) {
    Tensor* s = gr.grad_sink(rgb);
    if (!s) return;
    const Tensor& x = gr.value(rgb);
    const std::size_t n = go.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int k = argmax3(x[i], x[n + i], x[2 * n + i]);
      (*s)[k * n + i] += go[i];
    }
  });
}

Var hsv_saturation(Var rgb) {
  Graph& g = graph_of(rgb);
  const Tensor& x = g.value(rgb);
  require_channels(x, 3, "hsv_saturation");
  return g.emit(saturation(x), {rgb}, [rgb](Graph& gr, const Tensor& go, const Tensor&) {
    Tensor* s = gr.grad_sink(rgb);
    if (!s) return;
    const Tensor& x = gr.value(rgb);
    const std::size_t n = go.size();
    for (std::size_t i = 0; i < n; ++i) {
      const float r = x[i], gg = x[n + i], b = x[2 * n + i];
      const int kmax = argmax3(r, gg, b);
      const int kmin = argmin3(r, gg, b);
      const float mx = x[kmax * n + i];
      const float mn = x[kmin * n + i];
      if (!(mx > 0.0f) || kmax == kmin) continue;
      (*s)[kmax * n + i] += go[i] * mn / (mx * mx);
      (*s)[kmin * n + i] -= go[i] / mx;
    }
  });
}

Var mse(Var a, Var b) {
  check_same(a, b, "mse");
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  if (x.empty()) throw InvalidInput("mse: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    s += d * d;
  }
  const double n = static_cast<double>(x.size());
  return g.emit(Tensor::scalar(static_cast<float>(s / n)), {a, b},
                [a, b, n](Graph& gr, const Tensor& go, const Tensor&) {
                  const Tensor& x = gr.value(a);
                  const Tensor& y = gr.value(b);
                  const float k = static_cast<float>(2.0 * go[0] / n);
                  if (Tensor* s = gr.grad_sink(a))
                    for (std::size_t i = 0; i < x.size(); ++i) (*s)[i] += k * (x[i] - y[i]);
                  if (Tensor* s = gr.grad_sink(b))
                    for (std::size_t i = 0; i < x.size(); ++i) (*s)[i] -= k * (x[i] - y[i]);
                });
}

Var mse(Var a, const Tensor& target) {
  Graph& g = graph_of(a);
  return mse(a, g.constant(target));
}

Var kl_standard_normal(Var mu, Var logvar) {
  check_same(mu, logvar, "kl_standard_normal");
  Graph& g = graph_of(mu);
  const Tensor& m = g.value(mu);
  const Tensor& lv = g.value(logvar);
  if (m.empty()) throw InvalidInput("kl_standard_normal: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double l = lv[i];
    s += 0.5 * (static_cast<double>(m[i]) * m[i] + std::exp(l) - l - 1.0);
  }
  const double n = static_cast<double>(m.size());
  return g.emit(Tensor::scalar(static_cast<float>(s / n)), {mu, logvar},
                [mu, logvar, n](Graph& gr, const Tensor& go, const Tensor&) {
                  const Tensor& m = gr.value(mu);
                  const Tensor& lv = gr.value(logvar);
                  const double k = go[0] / n;
                  if (Tensor* s = gr.grad_sink(mu))
                    for (std::size_t i = 0; i < m.size(); ++i) (*s)[i] += static_cast<float>(k * m[i]);
                  if (Tensor* s = gr.grad_sink(logvar))
                    for (std::size_t i = 0; i < m.size(); ++i)
                      (*s)[i] += static_cast<float>(k * 0.5 * (std::exp(static_cast<double>(lv[i])) - 1.0));
                });
}

Var reparameterize(Var mu, Var logvar, const Tensor& eps) {
  check_same(mu, logvar, "reparameterize");
  Graph& g = graph_of(mu);
  require_same_shape(g.value(mu), eps, "reparameterize");
  const Tensor& m = g.value(mu);
  const Tensor& lv = g.value(logvar);
  Tensor out = Tensor::like(m);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m[i] + std::exp(0.5f * lv[i]) * eps[i];
  return g.emit(std::move(out), {mu, logvar}, [mu, logvar, eps](Graph& gr, const Tensor& go, const Tensor&) {
    if (Tensor* s = gr.grad_sink(mu))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i];
    if (Tensor* s = gr.grad_sink(logvar)) {
      const Tensor& lv = gr.value(logvar);
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * 0.5f * std::exp(0.5f * lv[i]) * eps[i];
    }
  });
}

Var blend(Var a, Var b, const Tensor& t) {
  check_same(a, b, "blend");
  Graph& g = graph_of(a);
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  const bool broadcast = t.channels() == 1 && t.height() == x.height() && t.width() == x.width();
  if (!broadcast && !t.same_shape(x)) {
    throw InvalidInput("blend: weight " + t.shape_string() + " does not match " + x.shape_string());
  }
  const std::size_t n = x.plane_size();
  auto weight = [&t, broadcast, n](std::size_t i) { return broadcast ? t[i % n] : t[i]; };
  Tensor out = Tensor::like(x);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float w = weight(i);
    out[i] = x[i] * w + y[i] * (1.0f - w);
  }
  return g.emit(std::move(out), {a, b}, [a, b, t, broadcast, n](Graph& gr, const Tensor& go, const Tensor&) {
    auto weight = [&t, broadcast, n](std::size_t i) { return broadcast ? t[i % n] : t[i]; };
    if (Tensor* s = gr.grad_sink(a))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * weight(i);
    if (Tensor* s = gr.grad_sink(b))
      for (std::size_t i = 0; i < go.size(); ++i) (*s)[i] += go[i] * (1.0f - weight(i));
  });
}

}  // namespace rsf::ad
