#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rsf/data.hpp"
#include "rsf/trainer.hpp"

namespace rsf {

struct RunRecord {
  std::string id;
  Scenario scenario = Scenario::GLPV;
  double psnr_input = 0.0;
  double ssim_input = 0.0;
  double psnr_output = 0.0;
  double ssim_output = 0.0;
  double seconds = 0.0;
  std::string config_hash;
  std::string variant;  // free label; "external" for ingested outputs
};

inline constexpr const char* kRecordHeader =
    "id,scenario,psnr_input,ssim_input,psnr_output,ssim_output,seconds,config_hash,variant";

void write_records_csv(const std::filesystem::path& path, const std::vector<RunRecord>& records);
/// LoadError with the line number on malformed rows or non-finite metrics.
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);
bool has_record_header(const std::filesystem::path& path);

struct ScenarioMean {
  Scenario scenario = Scenario::GLPV;
  int count = 0;
  double psnr_input = 0.0;
  double ssim_input = 0.0;
  double psnr_output = 0.0;
  double ssim_output = 0.0;
  double seconds = 0.0;
};

/// Arithmetic means per scenario, in GLPV/PPE/HoLEP order; scenarios without records are omitted.
std::vector<ScenarioMean> scenario_means(const std::vector<RunRecord>& records);

/// Published per-scenario (psnr, ssim) cells used as side-by-side reference rows.
struct ReferenceRow {
  std::string label;
  std::array<std::array<double, 2>, 3> cells;  // GLPV, PPE, HoLEP
};

const ReferenceRow& reference_method_row();
std::vector<ReferenceRow> reference_rows(const std::string& study);

/// Square working copy: centre crop to the short side, then area downscale.
ImageTensor prepare_image(const ImageTensor& img, int resize);

// ---- dehaze ----------------------------------------------------------------

struct DehazeArtifacts {
  std::filesystem::path output;
  std::filesystem::path config;
  std::filesystem::path loss_csv;
  std::filesystem::path variance_png;  // empty unless debug
  std::filesystem::path mask_png;
};

/// Writes <out>, <stem>.config.txt and <stem>.loss.csv; with `debug` also
/// <stem>.variance.png and <stem>.mask.png (low region tinted red).
DehazeArtifacts dehaze_file(const std::filesystem::path& input, const std::filesystem::path& out, const TrainConfig& cfg,
                            bool debug, const ProgressFn& progress = {});

ImageTensor variance_heatmap(const VarianceMap& f);
ImageTensor mask_overlay(const ImageTensor& rgb, const RegionMask& mask);

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
  std::filesystem::path manifest;
  std::optional<Scenario> scenario;
  int limit = -1;  // pairs per scenario; negative means all
  int workers = 1;
  std::filesystem::path report_dir;
  std::optional<std::filesystem::path> external_dir;
  std::string variant = "rsf";
  TrainConfig config;  // config.resize applies to both images before metrics
};

struct PairFailure {
  std::string id;
  std::string message;
};

struct EvalResult {
  std::vector<RunRecord> records;  // manifest order
  std::vector<PairFailure> failures;
};

/// Run directory layout:
///   config.txt, records.csv, report.md, loss/<id>.csv, images/<id>.png
/// External evaluation writes no loss or image files.
EvalResult run_eval(const EvalOptions& opts);

std::vector<PairEntry> select_pairs(const PairManifest& manifest, std::optional<Scenario> scenario, int limit);

/// Markdown: one row per scenario with input/output means and wall time,
/// followed by the published reference row.
std::string eval_markdown(const std::vector<RunRecord>& records, const std::string& variant);

// ---- ablate ----------------------------------------------------------------

struct AblationVariant {
  std::string label;
  TrainConfig config;
};

/// Known studies: fill, reorg, color, kernel. InvalidInput otherwise.
std::vector<AblationVariant> ablation_variants(const std::string& study, const TrainConfig& base);

struct AblationResult {
  std::vector<std::pair<std::string, std::vector<RunRecord>>> rows;
  std::vector<PairFailure> failures;
};

/// One eval run directory per variant under report_dir, plus ablation.md / ablation.csv.
AblationResult run_ablation(const std::string& study, const EvalOptions& base);

// ---- report ----------------------------------------------------------------

struct ReportRow {
  std::string label;
  std::string config_hash;
  int count = 0;
  double mean_psnr = 0.0;  // over every record of the row
  double mean_ssim = 0.0;
  std::vector<ScenarioMean> scenarios;
};

/// Groups every RunRecord CSV under `runs_dir` (recursively) by config hash
/// and sorts by mean output PSNR, descending.
std::vector<ReportRow> aggregate_runs(const std::filesystem::path& runs_dir);

std::string report_markdown(const std::vector<ReportRow>& rows);
void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);

}  // namespace rsf
