#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf {

enum class Scenario { GLPV, PPE, HoLEP };

inline constexpr std::array<Scenario, 3> kAllScenarios = {Scenario::GLPV, Scenario::PPE, Scenario::HoLEP};

std::string to_string(Scenario s);
/// Exact, case-sensitive names; nullopt otherwise.
std::optional<Scenario> parse_scenario(const std::string& name);

struct PairEntry {
  std::string id;
  Scenario scenario = Scenario::GLPV;
  std::filesystem::path clean_path;  // relative to the manifest root
  std::filesystem::path hazy_path;

  bool operator==(const PairEntry&) const = default;
};

struct PairManifest {
  std::filesystem::path root;
  std::vector<PairEntry> entries;

  std::filesystem::path clean(const PairEntry& e) const { return root / e.clean_path; }
  std::filesystem::path hazy(const PairEntry& e) const { return root / e.hazy_path; }
  std::map<Scenario, int> counts() const;

  bool operator==(const PairManifest&) const = default;
};

/// CSV with header `id,scenario,clean_path,hazy_path`; root is the manifest's
/// directory. Blank lines and `#` comments are skipped. Duplicate ids, unknown
/// scenarios and missing files raise LoadError with the line number.
PairManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const PairManifest& manifest);

/// I = J t + A (1 - t). `transmission` is a 1-channel map or empty for the scalar.
struct HazeParams {
  std::array<float, 3> airlight{1.0f, 1.0f, 1.0f};
  float transmission = 1.0f;
  Tensor transmission_map;
};

ImageTensor synthesize_haze(const ImageTensor& clean, const HazeParams& params);

/// Exact area-average resampling of a square image to side x side.
ImageTensor downscale(const ImageTensor& img, int side);

}  // namespace rsf
