#include "rsf/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::GLPV: return "GLPV";
    case Scenario::PPE: return "PPE";
    case Scenario::HoLEP: return "HoLEP";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(const std::string& name) {
  for (Scenario s : kAllScenarios)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

std::map<Scenario, int> PairManifest::counts() const {
  std::map<Scenario, int> c;
  for (Scenario s : kAllScenarios) c[s] = 0;
  for (const auto& e : entries) ++c[e.scenario];
  return c;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

PairManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path.string());
  PairManifest m;
  m.root = path.parent_path();
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    const auto fields = split_csv(line);
    auto fail = [&](const std::string& why) {
      return LoadError(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id", "scenario", "clean_path", "hazy_path"}) {
        throw fail("expected header id,scenario,clean_path,hazy_path");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) throw fail("expected 4 fields, got " + std::to_string(fields.size()));
    PairEntry e;
    e.id = fields[0];
    if (e.id.empty()) throw fail("empty id");
    const auto sc = parse_scenario(fields[1]);
    if (!sc) throw fail("unknown scenario '" + fields[1] + "' (expected GLPV, PPE or HoLEP)");
    e.scenario = *sc;
    e.clean_path = fields[2];
    e.hazy_path = fields[3];
    if (!ids.insert(e.id).second) throw fail("duplicate id '" + e.id + "'");
    for (const auto& p : {m.root / e.clean_path, m.root / e.hazy_path}) {
      if (!std::filesystem::is_regular_file(p)) throw fail("missing file " + p.string());
    }
    m.entries.push_back(std::move(e));
  }
  if (!header_seen) throw LoadError(path.string() + ":1: expected header id,scenario,clean_path,hazy_path");
  return m;
}

void write_manifest(const std::filesystem::path& path, const PairManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "id,scenario,clean_path,hazy_path\n";
  for (const auto& e : manifest.entries) {
    out << e.id << ',' << to_string(e.scenario) << ',' << e.clean_path.generic_string() << ','
        << e.hazy_path.generic_string() << '\n';
  }
}

ImageTensor synthesize_haze(const ImageTensor& clean, const HazeParams& p) {
  require_channels(clean, 3, "synthesize_haze");
  const bool use_map = !p.transmission_map.empty();
  if (use_map && (p.transmission_map.channels() != 1 || p.transmission_map.height() != clean.height() ||
                  p.transmission_map.width() != clean.width())) {
    throw InvalidInput("synthesize_haze: transmission map must be 1 x H x W");
  }
  const std::size_t n = clean.plane_size();
  ImageTensor out = Tensor::like(clean);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const float t = use_map ? p.transmission_map[i] : p.transmission;
      const float v = clean[c * n + i] * t + p.airlight[c] * (1.0f - t);
      out[c * n + i] = std::clamp(v, 0.0f, 1.0f);
    }
  }
  return out;
}

ImageTensor downscale(const ImageTensor& img, int side) {
  if (img.height() != img.width()) {
    throw InvalidInput("downscale: expected a square image, got " + img.shape_string());
  }
  const int n = img.height();
  if (side < 1 || side > n) throw InvalidInput("downscale: side must lie in [1, " + std::to_string(n) + "]");
  if (side == n) return img;
  // Source pixel i covers [i, i+1); target pixel j covers [j*s, (j+1)*s) with s = n/side.
  const double s = static_cast<double>(n) / side;
  std::vector<std::vector<std::pair<int, double>>> taps(static_cast<std::size_t>(side));
  for (int j = 0; j < side; ++j) {
    const double lo = j * s, hi = (j + 1) * s;
    for (int i = static_cast<int>(lo); i < n && i < hi; ++i) {
      const double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      if (w > 0.0) taps[j].emplace_back(i, w / s);
    }
  }
  ImageTensor out(img.channels(), side, side);
  std::vector<double> rowbuf(static_cast<std::size_t>(side) * n);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < n; ++y) {
      const float* src = img.row(c, y);
      for (int j = 0; j < side; ++j) {
        double acc = 0.0;
        for (auto [i, w] : taps[j]) acc += w * src[i];
        rowbuf[static_cast<std::size_t>(j) * n + y] = acc;  // transposed: column j, row y
      }
    }
    for (int jy = 0; jy < side; ++jy) {
      for (int jx = 0; jx < side; ++jx) {
        double acc = 0.0;
        const double* col = rowbuf.data() + static_cast<std::size_t>(jx) * n;
        for (auto [i, w] : taps[jy]) acc += w * col[i];
        out.at(c, jy, jx) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace rsf
