#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <string>

#include "rsf/data.hpp"
#include "rsf/png_io.hpp"
#include "support/synthetic.hpp"

namespace rsf::testing {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes `per_scenario` hazed tissue pairs per scenario under dir and a
/// manifest.csv next to them. Ids are <scenario>_<k>.
inline PairManifest make_pair_set(const std::filesystem::path& dir, int per_scenario, int size, std::uint64_t seed,
                                  float airlight = 0.9f, float transmission = 0.6f) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "clean");
  fs::create_directories(dir / "hazy");
  PairManifest m;
  m.root = dir;
  std::uint64_t s = seed;
  for (Scenario sc : kAllScenarios)
    for (int k = 0; k < per_scenario; ++k) {
      const std::string id = to_string(sc) + "_" + std::to_string(k);
      const Tensor clean = tissue_image(size, s++);
      HazeParams hp;
      hp.airlight = {airlight, airlight, airlight};
      hp.transmission = transmission;
      write_png(dir / "clean" / (id + ".png"), clean);
      write_png(dir / "hazy" / (id + ".png"), synthesize_haze(clean, hp));
      m.entries.push_back({id, sc, fs::path("clean") / (id + ".png"), fs::path("hazy") / (id + ".png")});
    }
  write_manifest(dir / "manifest.csv", m);
  return m;
}

/// Runs the command through the shell; returns the exit status.
inline int run(const std::string& cmd) {
  const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (st == -1) return -1;
  return WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
}

}  // namespace rsf::testing
