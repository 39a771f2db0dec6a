#pragma once

#include <span>
#include <string>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moments per parameter and the shared step counter.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

/// One bias-corrected ADAM update of every parameter. Moments are created on
/// the first call. A non-finite gradient throws NumericError naming the
/// parameter, before anything is modified.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads,
               const AdamConfig& cfg, std::span<const std::string> names = {});

}  // namespace rsf
