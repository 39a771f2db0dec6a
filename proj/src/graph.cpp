#include "rsf/graph.hpp"

#include "rsf/error.hpp"

namespace rsf {

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}});
  return {this, nodes_.size() - 1};
}

Var Graph::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}});
  return {this, nodes_.size() - 1};
}

Var Graph::parameter(const Tensor& param) {
  Var v = variable(param);
  params_.emplace_back(&param, v.id);
  return v;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id];
  return n.grad.empty() ? Tensor::like(n.value) : n.grad;
}

Tensor Graph::parameter_grad(const Tensor& param) const {
  Tensor total = Tensor::like(param);
  for (const auto& [ptr, id] : params_) {
    if (ptr != &param || nodes_[id].grad.empty()) continue;
    const Tensor& g = nodes_[id].grad;
    for (std::size_t i = 0; i < g.size(); ++i) total[i] += g[i];
  }
  return total;
}

Var Graph::emit(Tensor value, const std::vector<Var>& inputs, BackwardFn fn) {
  bool needs = false;
  for (Var in : inputs) {
    if (in.graph != this) throw InvalidInput("graph: mixing nodes from different graphs");
    needs = needs || nodes_[in.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(fn) : BackwardFn{}});
  return {this, nodes_.size() - 1};
}

Tensor* Graph::grad_sink(Var v) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) n.grad = Tensor::like(n.value);
  return &n.grad;
}

void Graph::backward(Var output) {
  Node& out = nodes_.at(output.id);
  if (out.value.size() != 1) {
    throw InvalidInput("backward: output must be a scalar, got " + out.value.shape_string());
  }
  if (!out.requires_grad) return;
  out.grad = Tensor::like(out.value, 1.0f);
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, n.grad, n.value);
  }
}

}  // namespace rsf
