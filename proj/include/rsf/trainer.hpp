#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rsf/adam.hpp"
#include "rsf/graph.hpp"
#include "rsf/networks.hpp"
#include "rsf/rsfm.hpp"

namespace rsf {

struct LossWeights {
  double cap = 1.0;
  double oi = 1.0;
  double gpn = 1.0;
  double kl = 1.0;
  double couple = 1.0;
};

struct TrainConfig {
  int iterations = 800;
  AdamConfig adam;
  LossWeights weights;
  std::uint64_t seed = 0;
  int resize = 0;  // square working side; 0 keeps the native size
  RsfmConfig rsfm;  // rsfm.window is also the dehaze conv kernel
  DehazeOptions network;

  int kernel() const { return rsfm.window; }

  /// Throws InvalidConfig.
  void validate() const;

  /// One `key=value` per line, fixed key order, shortest round-trip numbers.
  std::string to_text() const;
  /// Unknown keys, malformed values → LoadError with the line number; out-of-range
  /// values → InvalidConfig. Missing keys keep defaults.
  static TrainConfig from_text(const std::string& text);

  /// FNV-1a 64 of to_text(); equal configs hash equal.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

TrainConfig read_train_config(const std::filesystem::path& path);
void write_train_config(const std::filesystem::path& path, const TrainConfig& cfg);

struct LossBreakdown {
  double cap = 0.0;
  double oi = 0.0;
  double gpn_recon = 0.0;
  double kl = 0.0;
  double couple = 0.0;
  double total = 0.0;
};

/// One evaluation of the full objective on a graph.
struct Objective {
  Var total;
  Var cap;
  Var oi;
  Var recon;
  Var kl;
  Var couple;
  DehazeOutput dehaze;
  GpnOutput gpn;
  Tensor transmission;

  LossBreakdown values() const;
};

/// total = w.cap*cap + w.oi*oi + w.gpn*recon + w.kl*kl + w.couple*couple.
/// `input` must already be padded to multiples of 8. With `frozen` the fill
/// plans (and therefore the transmission map) are reused instead of recomputed.
Objective build_objective(Graph& g, const ModelState& model, const ImageTensor& input, const Tensor& eps,
                          const LossWeights& weights, const std::vector<FillPlan>* frozen = nullptr);

/// Reflect-pad bottom and right edges up to the next multiple.
ImageTensor pad_to_multiple(const ImageTensor& img, int multiple);
/// Top-left height x width window.
ImageTensor crop(const ImageTensor& img, int height, int width);

struct FitResult {
  ImageTensor output;  // D(x) at the input's size
  std::vector<LossBreakdown> history;
  VarianceMap final_variance;  // from the final forward pass, padded size
  RegionMask final_mask;
  double seconds = 0.0;
};

using ProgressFn = std::function<void(int iteration, const LossBreakdown&)>;

/// Zero-shot optimisation of fresh networks on one image.
/// Throws NumericError naming the iteration if a loss goes non-finite.
FitResult fit_single_image(const ImageTensor& input, const TrainConfig& cfg, const ProgressFn& progress = {});

/// Header: iteration,cap,oi,gpn_recon,kl,couple,total. Iterations are 1-based.
void write_loss_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history);

}  // namespace rsf
