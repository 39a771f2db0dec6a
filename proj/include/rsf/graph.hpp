#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid for the graph's lifetime.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so replaying
/// them backwards visits every node after all of its consumers.
///
/// Gradients accumulate: a node used twice receives the sum of both
/// contributions. Nodes that do not depend on any variable carry no gradient.
class Graph {
 public:
  /// Called with the node's accumulated gradient and its forward value;
  /// pushes contributions to the inputs.
  using BackwardFn = std::function<void(Graph&, const Tensor& grad_out, const Tensor& value)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Leaf bound to a model parameter. parameter_grad(param) reads its gradient after backward().
  Var parameter(const Tensor& param);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient of `v`; a zero tensor when nothing reached it.
  Tensor grad(Var v) const;
  Tensor parameter_grad(const Tensor& param) const;

  /// Seeds d(output)/d(output) = 1. `output` must be a scalar.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }

  // --- op construction ---

  /// Appends a node; `fn` runs only if some input requires a gradient.
  Var emit(Tensor value, const std::vector<Var>& inputs, BackwardFn fn);

  /// Mutable gradient accumulator for an input, or nullptr if it needs none.
  Tensor* grad_sink(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  std::vector<std::pair<const Tensor*, std::size_t>> params_;
};

/// Differentiable operations. Shapes follow the forward definitions; shape
/// errors throw InvalidInput.
namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, float s);
Var add_scalar(Var a, float s);
Var exp(Var a);
/// Elementwise product with a constant tensor (no gradient to `c`).
Var mul_const(Var a, const Tensor& c);

/// Mean of all elements, as a scalar node.
Var mean(Var a);
/// Weighted sum of scalar nodes.
Var weighted_sum(std::initializer_list<std::pair<float, Var>> terms);

Var sigmoid(Var a);
Var leaky_relu(Var a, float slope = 0.2f);
Var clamp(Var a, float lo, float hi);

/// 2x2 mean pooling, stride 2. Height and width must be even.
Var avg_pool2(Var a);
/// Nearest-neighbour x2 upsampling.
Var upsample_nearest2(Var a);

/// Stride-1 cross-correlation with reflect padding k/2.
/// weight: (out*in, k, k); bias: (out, 1, 1).
Var conv2d(Var x, Var weight, Var bias, int k);

/// Concatenate input with its (down 1, right 1) circular shift,
/// or with a plain copy when `shift` is false.
Var reorganize(Var x, bool shift = true);

Var rgb_to_ycbcr(Var rgb);
/// Inverse conversion without clamping.
Var ycbcr_to_rgb(Var ycbcr);

/// out = x; out[t] += gain * (x[src] - box(x[src])) for every target channel t.
/// `gain` is a 1-channel constant.
Var highpass_fill(Var x, const Tensor& gain, int window, int source_channel,
                  std::initializer_list<int> target_channels);

/// HSV value max(R,G,B) and saturation (max-min)/max (0 where max == 0).
Var hsv_value(Var rgb);
Var hsv_saturation(Var rgb);

/// Mean squared error, as a scalar node.
Var mse(Var a, Var b);
Var mse(Var a, const Tensor& target);

/// mean(0.5 * (mu^2 + exp(logvar) - logvar - 1)).
Var kl_standard_normal(Var mu, Var logvar);

/// mu + exp(0.5 * logvar) * eps.
Var reparameterize(Var mu, Var logvar, const Tensor& eps);

/// a * t + b * (1 - t) with a constant 1-channel or same-shape `t`.
Var blend(Var a, Var b, const Tensor& t);

}  // namespace ad

}  // namespace rsf
