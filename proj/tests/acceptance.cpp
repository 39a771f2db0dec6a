// Acceptance run: one PASS / FAIL / SKIP line per criterion.
//   acceptance            all criteria
//   acceptance --only 4   a single criterion
// Exit status: 1 if some selected criterion failed, 77 if every selected one
// was skipped, 0 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rsf/adam.hpp"
#include "rsf/color.hpp"
#include "rsf/data.hpp"
#include "rsf/harness.hpp"
#include "rsf/losses.hpp"
#include "rsf/metrics.hpp"
#include "rsf/png_io.hpp"
#include "rsf/rsfm.hpp"
#include "rsf/trainer.hpp"
#include "support/fixture.hpp"
#include "support/gradcases.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace rsf;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  int checks = 0;
  std::vector<std::string> bad;
  for (const auto& c : testing::gradient_cases())
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ++checks;
      const testing::FdResult r = c.run(seed);
      if (!(r.rel < c.tolerance)) bad.push_back(c.name + "@" + std::to_string(seed) + " rel=" + fmt("%.2e", r.rel));
    }
  const double secs = since(t0);
  std::ostringstream d;
  d << checks << " checks, " << bad.size() << " over tolerance, " << fmt("%.1f", secs) << " s";
  for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 5); ++i) d << "; " << bad[i];
  return {bad.empty() && secs < 60.0 ? Status::Pass : Status::Fail, d.str()};
}

Outcome oracle_suite() {
  const auto t0 = Clock::now();
  double worst_var = 0.0, worst_ssim = 0.0, worst_psnr = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor a = testing::random_image(3, 48, 48, 500 + seed);
    const Tensor y = luma(a);
    for (int window : {3, 7}) {
      const VarianceMap f = local_variance(y, window);
      const auto brute = testing::brute_local_variance(y, window);
      for (std::size_t i = 0; i < brute.size(); ++i) worst_var = std::max(worst_var, std::abs(f.values[i] - brute[i]));
    }
    Tensor b = a;
    Rng rng(seed);
    for (float& v : b.data()) v = std::clamp(v + static_cast<float>(rng.uniform(-0.15, 0.15)), 0.0f, 1.0f);
    worst_ssim = std::max(worst_ssim, std::abs(ssim(a, b) - testing::brute_ssim(a, b)));
    worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b) - testing::brute_psnr(a, b)));
  }
  const double secs = since(t0);
  const bool ok = worst_var < 1e-6 && worst_ssim < 1e-4 && worst_psnr < 1e-9 && secs < 60.0;
  return {ok ? Status::Pass : Status::Fail, "max |dF| " + fmt("%.2e", worst_var) + ", |dSSIM| " + fmt("%.2e", worst_ssim) +
                                                ", |dPSNR| " + fmt("%.2e", worst_psnr) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome rsfm_properties() {
  int violations = 0;
  double worst_const = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Tensor flat(3, 32, 32, static_cast<float>(0.05 + 0.09 * seed));
    const Tensor once = rsfm_apply(flat, {});
    for (std::size_t i = 0; i < flat.size(); ++i) worst_const = std::max(worst_const, double(std::abs(once[i] - flat[i])));

    const Tensor ycc = rgb_to_ycbcr(testing::tissue_image(64, 40 + seed));
    FillPlan plan;
    const Tensor out = rsfm_apply_ycbcr(ycc, {}, &plan);
    for (std::size_t i = 0; i < ycc.size(); ++i)
      if (out[i] != ycc[i] && !plan.mask.is_low(i % ycc.plane_size())) ++violations;

    // Raising the ratio can only grow the low set.
    RegionMask prev = mark_regions(plan.variance, 0.05);
    for (double ratio : {0.1, 0.2, 0.4, 0.8}) {
      RegionMask m = mark_regions(plan.variance, ratio);
      for (std::size_t i = 0; i < m.size(); ++i)
        if (prev.is_low(i) && !m.is_low(i)) ++violations;
      prev = m;
    }

    const Tensor img = testing::random_image(3, 9 + seed, 6 + seed, seed);
    const Tensor r = pixel_reorganize(img);
    for (int c = 0; c < 3; ++c) {
      if (r.channel(c).data() != img.channel(c).data()) ++violations;
      if (circular_shift(r.channel(3 + c), -1, -1).data() != img.channel(c).data()) ++violations;
    }
  }
  const bool ok = violations == 0 && worst_const <= 1e-5;
  return {ok ? Status::Pass : Status::Fail,
          std::to_string(violations) + " violations, constant drift " + fmt("%.2e", worst_const)};
}

Outcome synthetic_recovery() {
  constexpr int kCases = 10, kSide = 256;
  constexpr double kNeeded = 0.7;
  const int need = static_cast<int>(std::ceil(kNeeded * kCases));
  TrainConfig cfg;
  cfg.seed = 0;

  int better = 0, done = 0;
  std::ostringstream d;
  const auto t0 = Clock::now();
  const unsigned workers = worker_count();
  while (done < kCases) {
    const int batch = std::min<int>(workers, kCases - done);
    std::vector<std::array<double, 2>> res(batch);
    std::vector<std::thread> pool;
    for (int b = 0; b < batch; ++b)
      pool.emplace_back([&, b] {
        const Tensor clean = testing::tissue_image(kSide, 2000 + done + b);
        HazeParams hp;
        hp.airlight = {0.9f, 0.9f, 0.9f};
        hp.transmission = 0.6f;
        const Tensor hazy = synthesize_haze(clean, hp);
        const FitResult fit = fit_single_image(hazy, cfg);
        res[b] = {psnr(hazy, clean), psnr(fit.output, clean)};
      });
    for (auto& t : pool) t.join();
    for (int b = 0; b < batch; ++b) {
      if (res[b][1] > res[b][0]) ++better;
      d << (done + b == 0 ? "" : "; ") << fmt("%.2f", res[b][0]) << "->" << fmt("%.2f", res[b][1]);
      std::cerr << "  case " << done + b << ": hazy " << fmt("%.2f", res[b][0]) << " dB, output "
                << fmt("%.2f", res[b][1]) << " dB\n";
    }
    done += batch;
    // Stop once the outcome can no longer change.
    if (better >= need || better + (kCases - done) < need) break;
  }
  std::ostringstream head;
  head << better << "/" << done << " improved (need " << need << "/" << kCases << ")";
  if (done < kCases) head << ", decided after " << done << " cases";
  head << ", " << fmt("%.0f", since(t0)) << " s; PSNR " << d.str();
  return {better >= need ? Status::Pass : Status::Fail, head.str()};
}

Outcome dataset_reproduction() {
  const char* manifest = std::getenv("RSF_DATASET_MANIFEST");
  if (!manifest || !*manifest) return {Status::Skip, "RSF_DATASET_MANIFEST not set; published dataset unavailable"};

  const char* out_env = std::getenv("RSF_ACCEPT_REPORT_DIR");
  const fs::path out = out_env && *out_env ? fs::path(out_env) : fs::temp_directory_path() / "rsf_acceptance_dataset";
  EvalOptions base;
  base.manifest = manifest;
  base.limit = 3;
  base.workers = static_cast<int>(worker_count());
  base.config.resize = 256;

  auto run = [&](const std::string& name, auto mutate) {
    EvalOptions o = base;
    mutate(o.config);
    o.variant = name;
    o.report_dir = out / name;
    return run_eval(o);
  };
  const EvalResult full = run("full", [](TrainConfig&) {});
  const EvalResult hf = run("hf_fill", [](TrainConfig& c) { c.rsfm.fill = FillRegion::High; });
  const EvalResult noreorg = run("no_reorg", [](TrainConfig& c) { c.network.reorganize = false; });

  std::ostringstream d;
  bool ok = full.failures.empty() && hf.failures.empty() && noreorg.failures.empty();
  const auto means = scenario_means(full.records);
  bool coverage = means.size() == 3;
  bool improves = true;
  for (const auto& m : means) {
    coverage = coverage && m.count >= 3;
    improves = improves && m.psnr_output > m.psnr_input && m.ssim_output > m.ssim_input;
    d << to_string(m.scenario) << " " << fmt("%.2f", m.psnr_input) << "/" << fmt("%.4f", m.ssim_input) << " -> "
      << fmt("%.2f", m.psnr_output) << "/" << fmt("%.4f", m.ssim_output) << "; ";
  }
  auto overall = [](const std::vector<RunRecord>& rs, bool use_ssim) {
    double s = 0.0;
    for (const auto& r : rs) s += use_ssim ? r.ssim_output : r.psnr_output;
    return rs.empty() ? 0.0 : s / static_cast<double>(rs.size());
  };
  const bool fill_dir = overall(full.records, false) > overall(hf.records, false) &&
                        overall(full.records, true) > overall(hf.records, true);
  const bool reorg_dir = overall(full.records, false) > overall(noreorg.records, false);
  d << "(a) " << (improves ? "holds" : "fails") << ", (b) LF>HF " << (fill_dir ? "holds" : "fails") << ", (c) reorg "
    << (reorg_dir ? "holds" : "fails") << "; tables in " << out.string();
  if (!coverage) d << "; fewer than 3 pairs in some scenario";
  ok = ok && coverage && improves && fill_dir && reorg_dir;
  return {ok ? Status::Pass : Status::Fail, d.str()};
}

Outcome determinism() {
  testing::TempDir t("rsf_acceptance_determinism");
  write_png(t.path / "in.png", testing::tissue_image(32, 77));
  const std::string cmd = std::string(RSF_TOOL_PATH) + " dehaze '" + (t.path / "in.png").string() + "' --seed 0 --quiet --out ";
  const int a = testing::run(cmd + "'" + (t.path / "a.png").string() + "'");
  const int b = testing::run(cmd + "'" + (t.path / "b.png").string() + "'");
  if (a != 0 || b != 0) return {Status::Fail, "dehaze exited with " + std::to_string(a) + "/" + std::to_string(b)};
  const std::string pa = testing::slurp(t.path / "a.png"), pb = testing::slurp(t.path / "b.png");
  const bool same = !pa.empty() && pa == pb;
  return {same ? Status::Pass : Status::Fail,
          std::to_string(pa.size()) + " bytes, " + (same ? "identical" : "different") + " across two 800-iteration runs"};
}

Outcome trivial_values() {
  std::vector<std::string> bad;
  {
    Graph g;
    const GpnLoss l = loss_gpn(g.constant(Tensor(3, 8, 8, 0.4f)), Tensor(3, 8, 8, 0.4f), g.constant(Tensor(8, 1, 1, 0.0f)),
                               g.constant(Tensor(8, 1, 1, 0.0f)));
    if (g.value(l.kl)[0] != 0.0f) bad.push_back("KL(0,0)");
  }
  {
    Graph g;
    const Tensor x = testing::random_image(3, 8, 8, 3);
    if (g.value(loss_oi(g.constant(x), x))[0] != 0.0f) bad.push_back("loss_oi(x,x)");
  }
  {
    Tensor p = testing::random_image(1, 4, 4, 9);
    const Tensor before = p;
    AdamState st;
    std::vector<Tensor*> ps{&p};
    std::vector<Tensor> gs{Tensor(1, 4, 4, 0.0f)};
    for (int i = 0; i < 3; ++i) adam_step(st, ps, gs, AdamConfig{});
    if (p.data() != before.data()) bad.push_back("ADAM zero gradient");
  }
  double worst = 0.0;
  {
    Tensor lattice(3, 17, 17 * 17);
    for (int r = 0; r < 17; ++r)
      for (int g = 0; g < 17; ++g)
        for (int b = 0; b < 17; ++b) {
          lattice.at(0, r, g * 17 + b) = r / 16.0f;
          lattice.at(1, r, g * 17 + b) = g / 16.0f;
          lattice.at(2, r, g * 17 + b) = b / 16.0f;
        }
    const Tensor back = ycbcr_to_rgb(rgb_to_ycbcr(lattice));
    for (std::size_t i = 0; i < back.size(); ++i) worst = std::max(worst, double(std::abs(back[i] - lattice[i])));
    if (!(worst < 1e-5)) bad.push_back("colour round trip");
  }
  std::string d = "colour lattice max error " + fmt("%.2e", worst);
  for (const auto& b : bad) d += "; failed: " + b;
  return {bad.empty() ? Status::Pass : Status::Fail, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"oracle suite", oracle_suite},
      {"rsfm properties", rsfm_properties},
      {"synthetic haze recovery", synthetic_recovery},
      {"dataset directional reproduction", dataset_reproduction},
      {"determinism", determinism},
      {"trivial values", trivial_values},
  };

  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }

  bool failed = false, ran = false;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << i + 1 << " [" << tag << "] " << criteria[i].first << ": " << o.detail << std::endl;
    failed = failed || o.status == Status::Fail;
    ran = ran || o.status != Status::Skip;
  }
  if (failed) return 1;
  return ran ? 0 : 77;
}
