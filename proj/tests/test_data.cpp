#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "rsf/data.hpp"
#include "rsf/error.hpp"
#include "rsf/metrics.hpp"
#include "rsf/png_io.hpp"
#include "support/synthetic.hpp"

using namespace rsf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string load_error(const fs::path& p) {
  try {
    load_manifest(p);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("scenario names") {
  for (Scenario s : kAllScenarios) CHECK(parse_scenario(to_string(s)) == s);
  CHECK(to_string(Scenario::HoLEP) == "HoLEP");
  CHECK_FALSE(parse_scenario("holep").has_value());
}

TEST_CASE("manifest loading") {
  TempDir dir("rsf_manifest_test");
  fs::create_directories(dir.path / "img");
  for (const char* f : {"img/a_c.png", "img/a_h.png", "img/b_c.png", "img/b_h.png"}) write_text(dir.path / f, "x");

  const fs::path m = dir.path / "pairs.csv";
  write_text(m, "id,scenario,clean_path,hazy_path\n# comment\n\na,GLPV,img/a_c.png,img/a_h.png\n"
                "b,HoLEP,img/b_c.png,img/b_h.png\n");
  const PairManifest pm = load_manifest(m);
  REQUIRE(pm.entries.size() == 2);
  CHECK(pm.counts().at(Scenario::GLPV) == 1);
  CHECK(pm.counts().at(Scenario::HoLEP) == 1);
  CHECK(pm.counts().at(Scenario::PPE) == 0);
  CHECK(fs::exists(pm.hazy(pm.entries[1])));

  const fs::path out = dir.path / "copy.csv";
  write_manifest(out, pm);
  CHECK(load_manifest(out) == pm);

  write_text(m, "id,scenario,clean_path,hazy_path\n");
  CHECK(load_manifest(m).entries.empty());

  write_text(m, "id,scenario,clean_path,hazy_path\na,GLPV,img/a_c.png,img/missing.png\n");
  std::string err = load_error(m);
  CHECK(err.find("missing.png") != std::string::npos);
  CHECK(err.find(":2:") != std::string::npos);

  write_text(m, "id,scenario,clean_path,hazy_path\na,GLPV,img/a_c.png,img/a_h.png\na,PPE,img/b_c.png,img/b_h.png\n");
  err = load_error(m);
  CHECK(err.find(":3:") != std::string::npos);
  CHECK(err.find("duplicate") != std::string::npos);

  write_text(m, "id,scenario,clean_path,hazy_path\na,TURP,img/a_c.png,img/a_h.png\n");
  CHECK(load_error(m).find("TURP") != std::string::npos);

  write_text(m, "name,kind\n");
  CHECK_FALSE(load_error(m).empty());
  CHECK_THROWS_AS(load_manifest(dir.path / "nope.csv"), LoadError);
}

TEST_CASE("haze synthesis") {
  const Tensor clean = testing::tissue_image(16, 1);
  HazeParams none;
  none.transmission = 1.0f;
  CHECK(synthesize_haze(clean, none).data() == clean.data());

  HazeParams full;
  full.airlight = {0.2f, 0.4f, 0.9f};
  full.transmission = 0.0f;
  const Tensor a = synthesize_haze(clean, full);
  for (int c = 0; c < 3; ++c)
    for (float v : a.plane(c)) CHECK(v == full.airlight[c]);

  HazeParams half;
  half.airlight = {1.0f, 1.0f, 1.0f};
  half.transmission = 0.5f;
  CHECK(synthesize_haze(Tensor(3, 1, 1, 0.5f), half)[0] == doctest::Approx(0.75));

  HazeParams hp;
  hp.airlight = {0.9f, 0.9f, 0.9f};
  double prev_psnr = 1e9;
  Tensor prev;
  for (float t : {0.9f, 0.6f, 0.3f}) {
    hp.transmission = t;
    const Tensor h = synthesize_haze(clean, hp);
    const double p = psnr(h, clean);
    CHECK(p < prev_psnr);
    prev_psnr = p;
    if (!prev.empty())
      for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(prev[i] - clean[i]) <= std::abs(h[i] - clean[i]));
    prev = h;
  }

  HazeParams map;
  map.transmission_map = Tensor(1, 4, 4);
  CHECK_THROWS_AS(synthesize_haze(clean, map), InvalidInput);
}

TEST_CASE("downscale") {
  const Tensor img = testing::tissue_image(30, 2);
  CHECK(downscale(img, 30).data() == img.data());
  const Tensor one = downscale(Tensor(3, 2, 2, 0.3f), 1);
  CHECK(one[0] == doctest::Approx(0.3));
  CHECK_THROWS_AS(downscale(Tensor(3, 4, 5), 2), InvalidInput);
  CHECK_THROWS_AS(downscale(img, 0), InvalidInput);
  CHECK_THROWS_AS(downscale(img, 31), InvalidInput);

  const Tensor big = testing::tissue_image(1080, 3);
  const Tensor small = downscale(big, 256);
  CHECK(small.height() == 256);
  CHECK(std::abs(small.mean() - big.mean()) < 1e-3);
}
