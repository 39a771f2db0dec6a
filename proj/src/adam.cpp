#include "rsf/adam.hpp"

#include <cmath>

#include "rsf/error.hpp"

namespace rsf {

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads,
               const AdamConfig& cfg, std::span<const std::string> names) {
  if (params.size() != grads.size()) throw InvalidInput("adam_step: parameter/gradient count mismatch");
  for (std::size_t p = 0; p < params.size(); ++p) {
    require_same_shape(*params[p], grads[p], "adam_step");
    if (!grads[p].all_finite()) {
      const std::string name = p < names.size() ? names[p] : "#" + std::to_string(p);
      throw NumericError("non-finite gradient for parameter " + name);
    }
  }
  if (state.m.empty()) {
    for (Tensor* t : params) {
      state.m.push_back(Tensor::like(*t));
      state.v.push_back(Tensor::like(*t));
    }
  }
  if (state.m.size() != params.size()) throw InvalidInput("adam_step: state does not match parameters");

  ++state.step;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    const Tensor& g = grads[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double mhat = mi / c1;
      const double vhat = vi / c2;
      w[i] = static_cast<float>(w[i] - cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon));
    }
  }
}

}  // namespace rsf
