#include "rsf/losses.hpp"

#include "rsf/error.hpp"

namespace rsf {

Var loss_cap(Var dehazed) { return ad::mse(ad::hsv_value(dehazed), ad::hsv_saturation(dehazed)); }

Var loss_oi(Var dehazed, const ImageTensor& input) {
  require_same_shape(dehazed.graph->value(dehazed), input, "loss_oi");
  return ad::mse(dehazed, input);
}

GpnLoss loss_gpn(Var airlight, const ImageTensor& input, Var mu, Var logvar) {
  require_same_shape(airlight.graph->value(airlight), input, "loss_gpn");
  return {ad::mse(airlight, input), ad::kl_standard_normal(mu, logvar)};
}

Tensor transmission_from_variance(const VarianceMap& f) {
  const float fmax = f.max();
  Tensor t = Tensor::like(f.values, 1.0f);
  if (!(fmax > 0.0f)) return t;
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.1f + 0.9f * (f.values[i] / fmax);
  return t;
}

Var loss_couple(const ImageTensor& input, Var dehazed, Var airlight, const Tensor& transmission) {
  require_same_shape(dehazed.graph->value(dehazed), input, "loss_couple");
  return ad::mse(ad::blend(dehazed, airlight, transmission), input);
}

}  // namespace rsf
