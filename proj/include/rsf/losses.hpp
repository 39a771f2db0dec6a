#pragma once

#include "rsf/graph.hpp"
#include "rsf/rsfm.hpp"

namespace rsf {

/// Colour-attenuation loss: MSE(brightness(D), saturation(D)).
Var loss_cap(Var dehazed);

/// Output-input loss: MSE(D, x).
Var loss_oi(Var dehazed, const ImageTensor& input);

struct GpnLoss {
  Var recon;  // MSE(A, x)
  Var kl;     // mean 0.5 (mu^2 + exp(logvar) - logvar - 1)
};

GpnLoss loss_gpn(Var airlight, const ImageTensor& input, Var mu, Var logvar);

/// t = 0.1 + 0.9 F / max(F); all ones when max(F) == 0.
Tensor transmission_from_variance(const VarianceMap& f);

/// MSE(x, D t + A (1 - t)) with t a constant.
Var loss_couple(const ImageTensor& input, Var dehazed, Var airlight, const Tensor& transmission);

}  // namespace rsf
