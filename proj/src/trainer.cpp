#include "rsf/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rsf/error.hpp"
#include "rsf/losses.hpp"

namespace rsf {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 1) throw InvalidConfig("iterations must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw InvalidConfig("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InvalidConfig("adam betas must lie in [0,1)");
  }
  if (!(adam.epsilon > 0.0)) throw InvalidConfig("adam epsilon must be > 0");
  for (double w : {weights.cap, weights.oi, weights.gpn, weights.kl, weights.couple}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidConfig("loss weights must be finite and >= 0");
  }
  if (resize < 0) throw InvalidConfig("resize must be >= 0");
  rsfm.validate();
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "iterations=" << iterations << "\n"
     << "learning_rate=" << format_double(adam.learning_rate) << "\n"
     << "beta1=" << format_double(adam.beta1) << "\n"
     << "beta2=" << format_double(adam.beta2) << "\n"
     << "epsilon=" << format_double(adam.epsilon) << "\n"
     << "lambda_cap=" << format_double(weights.cap) << "\n"
     << "lambda_oi=" << format_double(weights.oi) << "\n"
     << "lambda_gpn=" << format_double(weights.gpn) << "\n"
     << "lambda_kl=" << format_double(weights.kl) << "\n"
     << "lambda_couple=" << format_double(weights.couple) << "\n"
     << "seed=" << seed << "\n"
     << "resize=" << resize << "\n"
     << "kernel=" << rsfm.window << "\n"
     << "threshold_ratio=" << format_double(rsfm.threshold_ratio) << "\n"
     << "enhance_gain=" << format_double(rsfm.enhance_gain) << "\n"
     << "fill=" << (rsfm.fill == FillRegion::Low ? "low" : "high") << "\n"
     << "reorganize=" << (network.reorganize ? "true" : "false") << "\n"
     << "color_conversion=" << (network.color_conversion ? "true" : "false") << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto fail = [&](const char* why) {
      return LoadError("config line " + std::to_string(lineno) + " (" + key + "): " + why);
    };
    auto as_double = [&]() {
      double d = 0.0;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
      if (ec != std::errc{} || p != val.data() + val.size()) throw fail("not a number");
      return d;
    };
    auto as_u64 = [&]() {
      std::uint64_t u = 0;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), u);
      if (ec != std::errc{} || p != val.data() + val.size()) throw fail("not an unsigned integer");
      return u;
    };
    auto as_int = [&]() {
      int i = 0;
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), i);
      if (ec != std::errc{} || p != val.data() + val.size()) throw fail("not an integer");
      return i;
    };
    auto as_bool = [&]() {
      if (val == "true" || val == "1") return true;
      if (val == "false" || val == "0") return false;
      throw fail("expected true or false");
    };
    if (key == "iterations") cfg.iterations = as_int();
    else if (key == "learning_rate") cfg.adam.learning_rate = as_double();
    else if (key == "beta1") cfg.adam.beta1 = as_double();
    else if (key == "beta2") cfg.adam.beta2 = as_double();
    else if (key == "epsilon") cfg.adam.epsilon = as_double();
    else if (key == "lambda_cap") cfg.weights.cap = as_double();
    else if (key == "lambda_oi") cfg.weights.oi = as_double();
    else if (key == "lambda_gpn") cfg.weights.gpn = as_double();
    else if (key == "lambda_kl") cfg.weights.kl = as_double();
    else if (key == "lambda_couple") cfg.weights.couple = as_double();
    else if (key == "seed") cfg.seed = as_u64();
    else if (key == "resize") cfg.resize = as_int();
    else if (key == "kernel") cfg.rsfm.window = as_int();
    else if (key == "threshold_ratio") cfg.rsfm.threshold_ratio = as_double();
    else if (key == "enhance_gain") cfg.rsfm.enhance_gain = as_double();
    else if (key == "fill") {
      if (val == "low") cfg.rsfm.fill = FillRegion::Low;
      else if (val == "high") cfg.rsfm.fill = FillRegion::High;
      else throw fail("expected low or high");
    } else if (key == "reorganize") cfg.network.reorganize = as_bool();
    else if (key == "color_conversion") cfg.network.color_conversion = as_bool();
    else throw fail("unknown key");
  }
  cfg.validate();
  return cfg;
}

std::uint64_t TrainConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string TrainConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

TrainConfig read_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return TrainConfig::from_text(ss.str());
}

void write_train_config(const std::filesystem::path& path, const TrainConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << cfg.to_text();
}

LossBreakdown Objective::values() const {
  auto v = [](Var x) { return static_cast<double>(x.graph->value(x)[0]); };
  return {v(cap), v(oi), v(recon), v(kl), v(couple), v(total)};
}

Objective build_objective(Graph& g, const ModelState& model, const ImageTensor& input, const Tensor& eps,
                          const LossWeights& w, const std::vector<FillPlan>* frozen) {
  Objective obj;
  Var x = g.constant(input);
  obj.dehaze = dehaze_forward(g, model.dehaze, x, frozen);
  obj.gpn = gpn_forward(g, model.gpn, x, eps);
  obj.cap = loss_cap(obj.dehaze.image);
  obj.oi = loss_oi(obj.dehaze.image, input);
  const GpnLoss gl = loss_gpn(obj.gpn.airlight, input, obj.gpn.mu, obj.gpn.logvar);
  obj.recon = gl.recon;
  obj.kl = gl.kl;
  obj.transmission = transmission_from_variance(obj.dehaze.final_variance);
  obj.couple = loss_couple(input, obj.dehaze.image, obj.gpn.airlight, obj.transmission);
  obj.total = ad::weighted_sum({{static_cast<float>(w.cap), obj.cap},
                                {static_cast<float>(w.oi), obj.oi},
                                {static_cast<float>(w.gpn), obj.recon},
                                {static_cast<float>(w.kl), obj.kl},
                                {static_cast<float>(w.couple), obj.couple}});
  return obj;
}

ImageTensor pad_to_multiple(const ImageTensor& img, int multiple) {
  const int h = img.height(), w = img.width();
  const int ph = (h + multiple - 1) / multiple * multiple;
  const int pw = (w + multiple - 1) / multiple * multiple;
  if (ph == h && pw == w) return img;
  Tensor out(img.channels(), ph, pw);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < ph; ++y)
      for (int x = 0; x < pw; ++x) out.at(c, y, x) = img.at(c, reflect_index(y, h), reflect_index(x, w));
  return out;
}

ImageTensor crop(const ImageTensor& img, int height, int width) {
  if (height > img.height() || width > img.width()) throw InvalidInput("crop: window exceeds image");
  if (height == img.height() && width == img.width()) return img;
  Tensor out(img.channels(), height, width);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.at(c, y, x) = img.at(c, y, x);
  return out;
}

FitResult fit_single_image(const ImageTensor& input, const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  require_channels(input, 3, "fit_single_image");
  if (!input.all_finite()) throw InvalidInput("fit_single_image: input has non-finite values");
  const auto start = std::chrono::steady_clock::now();

  const ImageTensor x = pad_to_multiple(input, kSpatialMultiple);
  Rng rng(cfg.seed);
  ModelState model = create_model(cfg.rsfm, cfg.network);
  init_weights(model, rng);

  auto params = model.parameters();
  std::vector<Tensor*> tensors;
  std::vector<std::string> names;
  for (const ParamRef& p : params) {
    tensors.push_back(p.tensor);
    names.push_back(p.name);
  }
  AdamState adam;
  const auto ls = latent_shape(x.height(), x.width());

  FitResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 1; it <= cfg.iterations; ++it) {
    Graph g;
    const Tensor eps = rng.normal_tensor(ls[0], ls[1], ls[2]);
    Objective obj = build_objective(g, model, x, eps, cfg.weights);
    const LossBreakdown lb = obj.values();
    for (double v : {lb.cap, lb.oi, lb.gpn_recon, lb.kl, lb.couple, lb.total}) {
      if (!std::isfinite(v)) throw NumericError("non-finite loss at iteration " + std::to_string(it));
    }
    result.history.push_back(lb);
    if (progress) progress(it, lb);

    g.backward(obj.total);
    std::vector<Tensor> grads;
    grads.reserve(tensors.size());
    for (Tensor* t : tensors) grads.push_back(g.parameter_grad(*t));
    adam_step(adam, tensors, grads, cfg.adam, names);
  }

  Graph g;
  DehazeOutput final_pass = dehaze_forward(g, model.dehaze, g.constant(x));
  result.output = crop(g.value(final_pass.image), input.height(), input.width());
  result.final_variance = final_pass.final_variance;
  result.final_mask = final_pass.plans.back().mask;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,cap,oi,gpn_recon,kl,couple,total\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    out << (i + 1) << ',' << format_double(h.cap) << ',' << format_double(h.oi) << ','
        << format_double(h.gpn_recon) << ',' << format_double(h.kl) << ',' << format_double(h.couple) << ','
        << format_double(h.total) << '\n';
  }
}

}  // namespace rsf
