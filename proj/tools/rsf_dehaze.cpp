#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rsf/data.hpp"
#include "rsf/harness.hpp"

namespace fs = std::filesystem;
using namespace rsf;

namespace {

constexpr int kExitFailures = 1;
constexpr int kExitIo = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RSF_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed RSF_SEED='" << env << "'\n";
    }
  }
  return 0;
}

struct Common {
  int iters = 800;
  double lr = 1e-3;
  int kernel = 7;
  std::uint64_t seed = 0;
  int resize = 0;

  void attach(CLI::App* app) {
    app->add_option("--iters", iters, "optimisation steps")->check(CLI::PositiveNumber);
    app->add_option("--lr", lr, "ADAM learning rate")->check(CLI::PositiveNumber);
    app->add_option("--kernel", kernel, "conv / variance window")->check(CLI::Validator(
        [](const std::string& v) {
          const int k = std::atoi(v.c_str());
          return (k >= 3 && k % 2 == 1) ? std::string{} : std::string("kernel must be odd and >= 3");
        },
        "ODD>=3"));
    app->add_option("--seed", seed, "RNG seed (default: $RSF_SEED or 0)");
    app->add_option("--resize", resize, "square working side, 0 keeps native size")->check(CLI::NonNegativeNumber);
  }

  TrainConfig config() const {
    TrainConfig c;
    c.iterations = iters;
    c.adam.learning_rate = lr;
    c.rsfm.window = kernel;
    c.seed = seed;
    c.resize = resize;
    return c;
  }
};

struct EvalArgs {
  std::string manifest;
  std::string scenario;
  int limit = -1;
  int workers = 1;
  std::string report = "runs/eval";
  std::string external;

  void attach(CLI::App* app, bool with_external) {
    app->add_option("--manifest", manifest, "pair manifest CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--scenario", scenario, "restrict to one scenario")->check(CLI::IsMember({"GLPV", "PPE", "HoLEP"}));
    app->add_option("--limit", limit, "pairs per scenario (default all)");
    app->add_option("--workers", workers, "concurrent fits")->check(CLI::PositiveNumber);
    app->add_option("--report", report, "output directory");
    if (with_external) app->add_option("--external-dir", external, "score precomputed outputs <id>.png instead of fitting");
  }

  EvalOptions options(const TrainConfig& cfg) const {
    EvalOptions o;
    o.manifest = manifest;
    if (!scenario.empty()) o.scenario = parse_scenario(scenario);
    o.limit = limit;
    o.workers = workers;
    o.report_dir = report;
    if (!external.empty()) o.external_dir = fs::path(external);
    o.config = cfg;
    return o;
  }
};

int report_failures(const std::vector<PairFailure>& failures) {
  if (failures.empty()) return 0;
  std::cerr << failures.size() << " pair(s) failed:\n";
  for (const auto& f : failures) std::cerr << "  " << f.id << ": " << f.message << "\n";
  return kExitFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot dehazing with region similarity filling"};
  app.require_subcommand(1);

  Common common;
  common.seed = default_seed();

  auto* dehaze = app.add_subcommand("dehaze", "dehaze one PNG");
  std::string input, out;
  bool debug = false, quiet = false;
  dehaze->add_option("input", input, "hazy PNG")->required();
  dehaze->add_option("--out", out, "output PNG")->required();
  dehaze->add_flag("--dump-debug", debug, "also write variance heatmap and region mask");
  dehaze->add_flag("--quiet", quiet, "no progress lines");
  common.attach(dehaze);

  auto* eval = app.add_subcommand("eval", "evaluate a manifest");
  EvalArgs eval_args;
  eval_args.attach(eval, true);
  common.attach(eval);

  auto* ablate = app.add_subcommand("ablate", "run an ablation study");
  EvalArgs ablate_args;
  ablate_args.report = "runs/ablate";
  std::string study;
  ablate->add_option("--study", study, "fill | reorg | color | kernel")
      ->required()
      ->check(CLI::IsMember({"fill", "reorg", "color", "kernel"}));
  ablate_args.attach(ablate, false);
  common.attach(ablate);

  auto* report = app.add_subcommand("report", "aggregate run directories");
  std::string runs_dir, report_out;
  report->add_option("--runs-dir", runs_dir, "directory holding records.csv files")->required();
  report->add_option("--out", report_out, "output directory (default: runs dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dehaze) {
      const TrainConfig cfg = common.config();
      if (!fs::is_regular_file(input)) {
        std::cerr << "error: cannot read " << input << "\n";
        return kExitIo;
      }
      ProgressFn progress;
      if (!quiet) {
        progress = [&](int it, const LossBreakdown& l) {
          if (it == 1 || it % 100 == 0 || it == cfg.iterations)
            std::cerr << "iter " << it << " total " << l.total << " cap " << l.cap << " oi " << l.oi << "\n";
        };
      }
      const DehazeArtifacts a = dehaze_file(input, out, cfg, debug, progress);
      std::cout << a.output.string() << "\n";
      return 0;
    }
    if (*eval) {
      const EvalResult r = run_eval(eval_args.options(common.config()));
      std::cout << eval_markdown(r.records, eval_args.external.empty() ? "rsf" : "external");
      return report_failures(r.failures);
    }
    if (*ablate) {
      const AblationResult r = run_ablation(study, ablate_args.options(common.config()));
      std::ifstream md(fs::path(ablate_args.report) / "ablation.md");
      std::cout << md.rdbuf();
      return report_failures(r.failures);
    }
    if (*report) {
      const fs::path dest = report_out.empty() ? fs::path(runs_dir) : fs::path(report_out);
      const auto rows = aggregate_runs(runs_dir);
      const std::string md = report_markdown(rows);
      fs::create_directories(dest);
      {
        std::ofstream f(dest / "summary.md");
        f << md;
        if (!f) throw std::runtime_error("cannot write " + (dest / "summary.md").string());
      }
      write_report_csv(dest / "summary.csv", rows);
      std::cout << md;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
