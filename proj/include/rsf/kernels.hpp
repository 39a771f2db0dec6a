#pragma once

#include "rsf/tensor.hpp"

// Hot loops of the pipeline in two flavours:
//   serial::  direct transcriptions of the definitions, kept as the reference
//   omp::     padded, vectorizable, OpenMP-parallel versions used at runtime
// Both use reflect padding. Results agree to float rounding; the omp versions
// are deterministic for any thread count (no cross-thread reductions).
//
// Convolution weights are stored as a Tensor of shape (out*in, k, k), i.e.
// weight.at(o * in + i, ky, kx); bias is (out, 1, 1).

namespace rsf::kernels {

namespace serial {

/// Per-channel mean over a window x window neighbourhood.
Tensor box_filter(const Tensor& in, int window);
/// Adjoint of box_filter: <box(a), b> == <a, box_transpose(b)>.
Tensor box_filter_transpose(const Tensor& grad, int window);

Tensor conv2d_forward(const Tensor& in, const Tensor& weight, const Tensor& bias, int k);
/// Accumulates (+=) into every non-null gradient.
void conv2d_backward(const Tensor& in, const Tensor& weight, const Tensor& grad_out, int k,
                     Tensor* grad_in, Tensor* grad_weight, Tensor* grad_bias);

}  // namespace serial

namespace omp {

Tensor box_filter(const Tensor& in, int window);
Tensor box_filter_transpose(const Tensor& grad, int window);

Tensor conv2d_forward(const Tensor& in, const Tensor& weight, const Tensor& bias, int k);
void conv2d_backward(const Tensor& in, const Tensor& weight, const Tensor& grad_out, int k,
                     Tensor* grad_in, Tensor* grad_weight, Tensor* grad_bias);

/// Reflect-pad every channel by `pad` on each side.
Tensor reflect_pad(const Tensor& in, int pad);
/// Adjoint of reflect_pad: sums padded entries back onto their source pixels.
Tensor reflect_fold(const Tensor& padded, int pad, int height, int width);

}  // namespace omp

// Runtime entry points.
using omp::box_filter;
using omp::box_filter_transpose;
using omp::conv2d_backward;
using omp::conv2d_forward;

}  // namespace rsf::kernels
