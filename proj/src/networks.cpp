#include "rsf/networks.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rsf/color.hpp"
#include "rsf/error.hpp"

namespace rsf {

ConvLayer::ConvLayer(int in, int out, int k)
    : in_channels(in), out_channels(out), kernel(k), weight(out * in, k, k), bias(out, 1, 1) {
  if (k < 1 || k % 2 == 0) throw InvalidConfig("conv kernel must be odd, got " + std::to_string(k));
}

DehazeNetwork DehazeNetwork::create(const RsfmConfig& rsfm, DehazeOptions options) {
  rsfm.validate();
  DehazeNetwork net;
  net.options = options;
  for (int i = 0; i < kDehazeUnits; ++i) net.units.push_back({ConvLayer(6, 3, rsfm.window), rsfm});
  return net;
}

GlobalPerceptionNetwork GlobalPerceptionNetwork::create() {
  GlobalPerceptionNetwork n;
  n.encoder = {ConvLayer(3, 8, 3), ConvLayer(8, 16, 3), ConvLayer(16, 32, 3)};
  n.mu_head = ConvLayer(32, kLatentChannels, 1);
  n.logvar_head = ConvLayer(32, kLatentChannels, 1);
  n.decoder = {ConvLayer(kLatentChannels, 32, 3), ConvLayer(32, 16, 3), ConvLayer(16, 8, 3)};
  n.to_rgb = ConvLayer(8, 3, 1);
  return n;
}

namespace {

template <typename Model, typename Ref, typename Fn>
void visit_layers(Model& m, Fn&& fn) {
  for (std::size_t i = 0; i < m.dehaze.units.size(); ++i) fn("dehaze.unit" + std::to_string(i), m.dehaze.units[i].conv);
  for (std::size_t i = 0; i < m.gpn.encoder.size(); ++i) fn("gpn.encoder" + std::to_string(i), m.gpn.encoder[i]);
  fn(std::string("gpn.mu_head"), m.gpn.mu_head);
  fn(std::string("gpn.logvar_head"), m.gpn.logvar_head);
  for (std::size_t i = 0; i < m.gpn.decoder.size(); ++i) fn("gpn.decoder" + std::to_string(i), m.gpn.decoder[i]);
  fn(std::string("gpn.to_rgb"), m.gpn.to_rgb);
}

}  // namespace

std::vector<ParamRef> ModelState::parameters() {
  std::vector<ParamRef> out;
  visit_layers<ModelState, ParamRef>(*this, [&out](const std::string& name, ConvLayer& l) {
    out.push_back({name + ".weight", &l.weight});
    out.push_back({name + ".bias", &l.bias});
  });
  return out;
}

std::vector<const Tensor*> ModelState::parameters() const {
  std::vector<const Tensor*> out;
  visit_layers<const ModelState, const Tensor*>(*this, [&out](const std::string&, const ConvLayer& l) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  });
  return out;
}

ModelState create_model(const RsfmConfig& rsfm, DehazeOptions options) {
  return ModelState{DehazeNetwork::create(rsfm, options), GlobalPerceptionNetwork::create()};
}

void init_weights(ModelState& model, Rng& rng) {
  visit_layers<ModelState, ParamRef>(model, [&rng](const std::string&, ConvLayer& l) {
    const double bound = std::sqrt(1.0 / (static_cast<double>(l.in_channels) * l.kernel * l.kernel));
    for (float& w : l.weight.data()) w = static_cast<float>(rng.uniform(-bound, bound));
    for (float& b : l.bias.data()) b = 0.0f;
  });
}

ModelState init_weights(Rng& rng, const RsfmConfig& rsfm, DehazeOptions options) {
  ModelState m = create_model(rsfm, options);
  init_weights(m, rng);
  return m;
}

Var apply_conv(Graph& g, Var x, const ConvLayer& layer) {
  if (g.value(x).channels() != layer.in_channels) {
    throw InvalidInput("conv: expected " + std::to_string(layer.in_channels) + " input channels, got " +
                       std::to_string(g.value(x).channels()));
  }
  return ad::conv2d(x, g.parameter(layer.weight), g.parameter(layer.bias), layer.kernel);
}

namespace {

const FillPlan& resolve_plan(const Tensor& source, const RsfmConfig& cfg, const FillPlan* frozen,
                             FillPlan& scratch) {
  if (frozen) {
    if (frozen->gain.height() != source.height() || frozen->gain.width() != source.width()) {
      throw InvalidInput("frozen fill plan does not match the input size");
    }
    return *frozen;
  }
  scratch = plan_fill(source, cfg);
  return scratch;
}

}  // namespace

Var differentiable_rsfm(Graph& g, Var ycbcr, const RsfmConfig& cfg, const FillPlan* frozen, FillPlan* plan_out) {
  require_channels(g.value(ycbcr), 3, "differentiable_rsfm");
  FillPlan scratch;
  const FillPlan& plan = resolve_plan(g.value(ycbcr).channel(0), cfg, frozen, scratch);
  Var out = ad::highpass_fill(ycbcr, plan.gain, cfg.window, 0, {0});
  if (plan_out) *plan_out = plan;
  return out;
}

Var differentiable_rsfm_rgb(Graph& g, Var rgb, const RsfmConfig& cfg, const FillPlan* frozen, FillPlan* plan_out) {
  require_channels(g.value(rgb), 3, "differentiable_rsfm_rgb");
  FillPlan scratch;
  const FillPlan& plan = resolve_plan(g.value(rgb).channel(1), cfg, frozen, scratch);
  Var out = ad::highpass_fill(rgb, plan.gain, cfg.window, 1, {0, 1, 2});
  if (plan_out) *plan_out = plan;
  return out;
}

DehazeOutput dehaze_forward(Graph& g, const DehazeNetwork& net, Var x, const std::vector<FillPlan>* frozen) {
  require_channels(g.value(x), 3, "dehaze_forward");
  if (net.units.size() != static_cast<std::size_t>(kDehazeUnits)) {
    throw InvalidInput("dehaze network must have exactly 5 units");
  }
  if (frozen && frozen->size() != net.units.size()) throw InvalidInput("frozen plans: one per unit required");

  DehazeOutput out;
  out.plans.resize(net.units.size());
  Var h = x;
  for (std::size_t u = 0; u < net.units.size(); ++u) {
    const DehazeUnit& unit = net.units[u];
    const FillPlan* fz = frozen ? &(*frozen)[u] : nullptr;
    Var r = ad::reorganize(h, net.options.reorganize);
    Var c = ad::sigmoid(apply_conv(g, r, unit.conv));
    if (net.options.color_conversion) {
      Var ycc = differentiable_rsfm(g, ad::rgb_to_ycbcr(c), unit.rsfm, fz, &out.plans[u]);
      h = ad::clamp(ad::ycbcr_to_rgb(ycc), 0.0f, 1.0f);
    } else {
      h = ad::clamp(differentiable_rsfm_rgb(g, c, unit.rsfm, fz, &out.plans[u]), 0.0f, 1.0f);
    }
  }
  out.image = h;
  out.final_variance = out.plans.back().variance;
  return out;
}

std::array<int, 3> latent_shape(int height, int width) {
  return {kLatentChannels, height / kSpatialMultiple, width / kSpatialMultiple};
}

GpnOutput gpn_forward(Graph& g, const GlobalPerceptionNetwork& net, Var x, const Tensor& eps) {
  const Tensor& in = g.value(x);
  require_channels(in, 3, "gpn_forward");
  if (in.height() % kSpatialMultiple != 0 || in.width() % kSpatialMultiple != 0 || in.height() == 0 ||
      in.width() == 0) {
    throw InvalidInput("gpn_forward: height and width must be positive multiples of 8, got " + in.shape_string());
  }
  const auto ls = latent_shape(in.height(), in.width());
  if (eps.channels() != ls[0] || eps.height() != ls[1] || eps.width() != ls[2]) {
    throw InvalidInput("gpn_forward: noise shape " + eps.shape_string() + " does not match the latent");
  }
  Var h = x;
  for (const ConvLayer& l : net.encoder) h = ad::avg_pool2(ad::leaky_relu(apply_conv(g, h, l)));
  GpnOutput out;
  out.mu = apply_conv(g, h, net.mu_head);
  out.logvar = apply_conv(g, h, net.logvar_head);
  Var z = ad::reparameterize(out.mu, out.logvar, eps);
  for (const ConvLayer& l : net.decoder) z = ad::leaky_relu(apply_conv(g, ad::upsample_nearest2(z), l));
  out.airlight = ad::sigmoid(apply_conv(g, z, net.to_rgb));
  return out;
}

GpnOutput gpn_forward(Graph& g, const GlobalPerceptionNetwork& net, Var x, Rng& rng) {
  const Tensor& in = g.value(x);
  const auto ls = latent_shape(in.height(), in.width());
  return gpn_forward(g, net, x, rng.normal_tensor(ls[0], ls[1], ls[2]));
}

namespace {

constexpr char kMagic[5] = {'R', 'S', 'F', 'D', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw LoadError("checkpoint: truncated header");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelState& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint " + path.string());
  const auto params = model.parameters();
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const Tensor* t : params) {
    put_u32(os, static_cast<std::uint32_t>(t->channels()));
    put_u32(os, static_cast<std::uint32_t>(t->height()));
    put_u32(os, static_cast<std::uint32_t>(t->width()));
  }
  for (const Tensor* t : params) {
    for (float v : t->data()) put_u32(os, std::bit_cast<std::uint32_t>(v));
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ModelState& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint " + path.string());
  char magic[5];
  if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0) throw LoadError("checkpoint: bad magic");
  auto params = model.parameters();
  if (get_u32(is) != params.size()) throw LoadError("checkpoint: tensor count does not match the model");
  for (const ParamRef& p : params) {
    const auto c = get_u32(is), h = get_u32(is), w = get_u32(is);
    if (int(c) != p.tensor->channels() || int(h) != p.tensor->height() || int(w) != p.tensor->width()) {
      throw LoadError("checkpoint: shape mismatch for " + p.name);
    }
  }
  for (const ParamRef& p : params) {
    for (float& v : p.tensor->data()) v = std::bit_cast<float>(get_u32(is));
  }
}

}  // namespace rsf
