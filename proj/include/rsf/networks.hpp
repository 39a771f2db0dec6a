#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "rsf/graph.hpp"
#include "rsf/rng.hpp"
#include "rsf/rsfm.hpp"
#include "rsf/tensor.hpp"

namespace rsf {

inline constexpr int kDehazeUnits = 5;
inline constexpr int kLatentChannels = 8;
/// The perception network pools three times, so inputs must be multiples of 8.
inline constexpr int kSpatialMultiple = 8;

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  Tensor weight;  // (out * in, k, k)
  Tensor bias;    // (out, 1, 1)

  ConvLayer() = default;
  ConvLayer(int in, int out, int k);
};

struct DehazeUnit {
  ConvLayer conv;  // 6 -> 3
  RsfmConfig rsfm;
};

/// Switches for the reorganization / colour-conversion ablations.
struct DehazeOptions {
  bool reorganize = true;        // false: duplicate channels instead of shifting
  bool color_conversion = true;  // false: fill in RGB with green as luma
};

/// Five reorganize -> conv -> sigmoid -> RSFM units. Kernel size = rsfm window.
struct DehazeNetwork {
  std::vector<DehazeUnit> units;
  DehazeOptions options;

  static DehazeNetwork create(const RsfmConfig& rsfm, DehazeOptions options = {});
};

/// VAE-style luminosity estimator.
///   encoder: 3 x {conv3x3, leaky-ReLU, avg-pool 2}, widths 3 -> 8 -> 16 -> 32
///   latent:  1x1 heads 32 -> 8 for mean and log-variance, reparameterized
///   decoder: 3 x {upsample 2, conv3x3, leaky-ReLU}, widths 8 -> 32 -> 16 -> 8,
///            then 1x1 to 3 and a sigmoid
struct GlobalPerceptionNetwork {
  std::array<ConvLayer, 3> encoder;
  ConvLayer mu_head;
  ConvLayer logvar_head;
  std::array<ConvLayer, 3> decoder;
  ConvLayer to_rgb;

  static GlobalPerceptionNetwork create();
};

struct ParamRef {
  std::string name;
  Tensor* tensor;
};

struct ModelState {
  DehazeNetwork dehaze;
  GlobalPerceptionNetwork gpn;

  /// Stable order: dehaze units first, then the perception network.
  /// Names are prefixed "dehaze." or "gpn.".
  std::vector<ParamRef> parameters();
  std::vector<const Tensor*> parameters() const;
};

ModelState create_model(const RsfmConfig& rsfm = {}, DehazeOptions options = {});

/// Weights ~ U(-b, b), b = sqrt(1 / (in * k * k)); biases 0. Consumes rng in parameter order.
void init_weights(ModelState& model, Rng& rng);
ModelState init_weights(Rng& rng, const RsfmConfig& rsfm = {}, DehazeOptions options = {});

/// Binds the layer's tensors as graph parameters and applies it.
Var apply_conv(Graph& g, Var x, const ConvLayer& layer);

/// RSFM on the graph. The plan (variance, mask, gain) comes from forward
/// values, or from `frozen` when given, and is a constant for backward.
/// `ycbcr` is YCbCr and only luma is filled.
Var differentiable_rsfm(Graph& g, Var ycbcr, const RsfmConfig& cfg, const FillPlan* frozen = nullptr,
                        FillPlan* plan_out = nullptr);

/// Colour-conversion ablation: fill computed on green, added to R, G and B.
Var differentiable_rsfm_rgb(Graph& g, Var rgb, const RsfmConfig& cfg, const FillPlan* frozen = nullptr,
                            FillPlan* plan_out = nullptr);

struct DehazeOutput {
  Var image;                    // D(x), values in [0,1]
  VarianceMap final_variance;   // luma variance inside the last unit
  std::vector<FillPlan> plans;  // one per unit, reusable as `frozen`
};

DehazeOutput dehaze_forward(Graph& g, const DehazeNetwork& net, Var x,
                            const std::vector<FillPlan>* frozen = nullptr);

struct GpnOutput {
  Var airlight;  // same shape as x, values in (0,1)
  Var mu;
  Var logvar;
};

/// (channels, height, width) of the latent maps for an h x w input.
std::array<int, 3> latent_shape(int height, int width);

GpnOutput gpn_forward(Graph& g, const GlobalPerceptionNetwork& net, Var x, const Tensor& eps);
GpnOutput gpn_forward(Graph& g, const GlobalPerceptionNetwork& net, Var x, Rng& rng);

/// "RSFD1", u32 tensor count, u32 (c, h, w) per tensor, then little-endian f32 data.
void save_checkpoint(const std::filesystem::path& path, const ModelState& model);
/// Shapes must match `model`'s layout exactly.
void load_checkpoint(const std::filesystem::path& path, ModelState& model);

}  // namespace rsf
