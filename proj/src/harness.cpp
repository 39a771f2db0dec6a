#include "rsf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "rsf/error.hpp"
#include "rsf/metrics.hpp"
#include "rsf/png_io.hpp"

namespace fs = std::filesystem;

namespace rsf {

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    out.push_back(cur);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const fs::path& path, int line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw LoadError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  return out.parent_path() / (out.stem().string() + suffix);
}

// Heatmap ramp: black -> purple -> orange -> yellow.
std::array<float, 3> ramp(float t) {
  static constexpr float stops[4][3] = {{0.0f, 0.0f, 0.0f}, {0.45f, 0.05f, 0.55f}, {0.95f, 0.45f, 0.05f}, {1.0f, 1.0f, 0.6f}};
  t = std::clamp(t, 0.0f, 1.0f) * 3.0f;
  const int i = std::min(2, static_cast<int>(t));
  const float u = t - static_cast<float>(i);
  return {stops[i][0] + u * (stops[i + 1][0] - stops[i][0]), stops[i][1] + u * (stops[i + 1][1] - stops[i][1]),
          stops[i][2] + u * (stops[i + 1][2] - stops[i][2])};
}

std::string cell(const std::array<double, 2>& c) { return fixed(c[0], 2) + " / " + fixed(c[1], 4); }

}  // namespace

// ---- records ---------------------------------------------------------------

void write_records_csv(const fs::path& path, const std::vector<RunRecord>& records) {
  auto out = open_out(path);
  out << kRecordHeader << "\n";
  for (const auto& r : records) {
    out << r.id << ',' << to_string(r.scenario) << ',' << num(r.psnr_input) << ',' << num(r.ssim_input) << ','
        << num(r.psnr_output) << ',' << num(r.ssim_output) << ',' << num(r.seconds) << ',' << r.config_hash << ','
        << r.variant << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

bool has_record_header(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line == kRecordHeader;
}

std::vector<RunRecord> read_records_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::string line;
  int n = 0;
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (line != kRecordHeader) throw LoadError(path.string() + ":1: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw LoadError(path.string() + ":" + std::to_string(n) + ": expected 9 fields");
    const auto sc = parse_scenario(f[1]);
    if (!sc) throw LoadError(path.string() + ":" + std::to_string(n) + ": unknown scenario '" + f[1] + "'");
    out.push_back({f[0], *sc, parse_num(f[2], path, n), parse_num(f[3], path, n), parse_num(f[4], path, n),
                   parse_num(f[5], path, n), parse_num(f[6], path, n), f[7], f[8]});
  }
  return out;
}

std::vector<ScenarioMean> scenario_means(const std::vector<RunRecord>& records) {
  std::vector<ScenarioMean> out;
  for (Scenario s : kAllScenarios) {
    ScenarioMean m;
    m.scenario = s;
    for (const auto& r : records) {
      if (r.scenario != s) continue;
      ++m.count;
      m.psnr_input += r.psnr_input;
      m.ssim_input += r.ssim_input;
      m.psnr_output += r.psnr_output;
      m.ssim_output += r.ssim_output;
      m.seconds += r.seconds;
    }
    if (m.count == 0) continue;
    const double n = m.count;
    m.psnr_input /= n;
    m.ssim_input /= n;
    m.psnr_output /= n;
    m.ssim_output /= n;
    m.seconds /= n;
    out.push_back(m);
  }
  return out;
}

// ---- reference cells -------------------------------------------------------

const ReferenceRow& reference_method_row() {
  static const ReferenceRow row{"published (LF fill, 7x7)", {{{20.13, 0.8924}, {18.59, 0.8011}, {22.66, 0.9445}}}};
  return row;
}

std::vector<ReferenceRow> reference_rows(const std::string& study) {
  const ReferenceRow& full = reference_method_row();
  if (study == "fill") {
    return {{"LF filling", full.cells}, {"HF filling", {{{18.34, 0.8276}, {17.74, 0.7701}, {20.84, 0.9251}}}}};
  }
  if (study == "reorg") {
    return {{"full", full.cells}, {"w/o reorganization", {{{18.19, 0.8169}, {16.70, 0.7645}, {18.55, 0.8957}}}}};
  }
  if (study == "color") {
    return {{"full", full.cells}, {"w/o colour conversion", {{{20.01, 0.8786}, {18.20, 0.7545}, {22.44, 0.9405}}}}};
  }
  if (study == "kernel") {
    return {{"3x3", {{{20.09, 0.8920}, {18.67, 0.8014}, {22.60, 0.9441}}}},
            {"5x5", {{{20.11, 0.8897}, {18.62, 0.8004}, {22.55, 0.9442}}}},
            {"7x7", full.cells},
            {"9x9", {{{20.08, 0.8889}, {18.60, 0.8008}, {22.65, 0.9435}}}}};
  }
  throw InvalidInput("unknown study '" + study + "' (expected fill, reorg, color or kernel)");
}

ImageTensor prepare_image(const ImageTensor& img, int resize) {
  if (resize <= 0) return img;
  const int side = std::min(img.height(), img.width());
  ImageTensor sq = img;
  if (img.height() != img.width()) {
    const int y0 = (img.height() - side) / 2, x0 = (img.width() - side) / 2;
    sq = Tensor(img.channels(), side, side);
    for (int c = 0; c < img.channels(); ++c)
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) sq.at(c, y, x) = img.at(c, y0 + y, x0 + x);
  }
  return downscale(sq, resize);
}

// ---- dehaze ----------------------------------------------------------------

ImageTensor variance_heatmap(const VarianceMap& f) {
  const Tensor& v = f.values;
  ImageTensor out(3, v.height(), v.width());
  const float peak = f.max();
  for (int y = 0; y < v.height(); ++y)
    for (int x = 0; x < v.width(); ++x) {
      const auto rgb = ramp(peak > 0.0f ? v.at(0, y, x) / peak : 0.0f);
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = rgb[c];
    }
  return out;
}

ImageTensor mask_overlay(const ImageTensor& rgb, const RegionMask& mask) {
  if (rgb.height() != mask.height() || rgb.width() != mask.width()) {
    throw InvalidInput("mask_overlay: mask does not match image " + rgb.shape_string());
  }
  ImageTensor out = rgb;
  const int w = rgb.width();
  for (int y = 0; y < rgb.height(); ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.is_low(std::size_t(y) * w + x)) continue;
      out.at(0, y, x) = 0.5f * rgb.at(0, y, x) + 0.5f;
      out.at(1, y, x) = 0.5f * rgb.at(1, y, x);
      out.at(2, y, x) = 0.5f * rgb.at(2, y, x);
    }
  return out;
}

DehazeArtifacts dehaze_file(const fs::path& input, const fs::path& out, const TrainConfig& cfg, bool debug,
                            const ProgressFn& progress) {
  const ImageTensor img = prepare_image(read_png(input), cfg.resize);
  DehazeArtifacts a;
  a.output = out;
  a.config = sibling(out, ".config.txt");
  a.loss_csv = sibling(out, ".loss.csv");
  // Fail on an unwritable destination before spending the optimisation.
  ensure_parent(out);
  write_train_config(a.config, cfg);

  const FitResult fit = fit_single_image(img, cfg, progress);
  write_png(out, fit.output);
  write_loss_csv(a.loss_csv, fit.history);
  if (debug) {
    a.variance_png = sibling(out, ".variance.png");
    a.mask_png = sibling(out, ".mask.png");
    VarianceMap f = fit.final_variance;
    f.values = crop(f.values, img.height(), img.width());
    RegionMask m(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        m.set_low(std::size_t(y) * img.width() + x, fit.final_mask.is_low(std::size_t(y) * fit.final_mask.width() + x));
    write_png(a.variance_png, variance_heatmap(f));
    write_png(a.mask_png, mask_overlay(fit.output, m));
  }
  return a;
}

// ---- eval ------------------------------------------------------------------

std::vector<PairEntry> select_pairs(const PairManifest& manifest, std::optional<Scenario> scenario, int limit) {
  std::map<Scenario, int> taken;
  std::vector<PairEntry> out;
  for (const auto& e : manifest.entries) {
    if (scenario && e.scenario != *scenario) continue;
    if (limit >= 0 && taken[e.scenario] >= limit) continue;
    ++taken[e.scenario];
    out.push_back(e);
  }
  return out;
}

std::string eval_markdown(const std::vector<RunRecord>& records, const std::string& variant) {
  std::ostringstream md;
  md << "| scenario | n | input PSNR / SSIM | " << variant << " PSNR / SSIM | seconds/image | published PSNR / SSIM |\n"
     << "|---|---|---|---|---|---|\n";
  const ReferenceRow& ref = reference_method_row();
  for (const auto& m : scenario_means(records)) {
    const auto idx = static_cast<std::size_t>(m.scenario);
    md << "| " << to_string(m.scenario) << " | " << m.count << " | " << cell({m.psnr_input, m.ssim_input}) << " | "
       << cell({m.psnr_output, m.ssim_output}) << " | " << fixed(m.seconds, 1) << " | " << cell(ref.cells[idx])
       << " |\n";
  }
  return md.str();
}

EvalResult run_eval(const EvalOptions& opts) {
  const PairManifest manifest = load_manifest(opts.manifest);
  const std::vector<PairEntry> pairs = select_pairs(manifest, opts.scenario, opts.limit);
  const TrainConfig& cfg = opts.config;
  cfg.validate();
  const std::string hash = opts.external_dir ? std::string("external") : cfg.hash_hex();

  fs::create_directories(opts.report_dir);
  write_train_config(opts.report_dir / "config.txt", cfg);

  std::vector<std::optional<RunRecord>> slots(pairs.size());
  std::vector<std::string> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;

  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      const PairEntry& e = pairs[i];
      try {
        const ImageTensor clean = prepare_image(read_png(manifest.clean(e)), cfg.resize);
        const ImageTensor hazy = prepare_image(read_png(manifest.hazy(e)), cfg.resize);
        RunRecord r;
        r.id = e.id;
        r.scenario = e.scenario;
        r.psnr_input = psnr(hazy, clean);
        r.ssim_input = ssim(hazy, clean);
        r.config_hash = hash;
        r.variant = opts.external_dir ? std::string("external") : opts.variant;
        ImageTensor output;
        if (opts.external_dir) {
          fs::path p = *opts.external_dir / (e.id + ".png");
          if (!fs::exists(p)) p = *opts.external_dir / e.hazy_path.filename();
          const auto t0 = std::chrono::steady_clock::now();
          output = prepare_image(read_png(p), cfg.resize);
          r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
          FitResult fit = fit_single_image(hazy, cfg);
          r.seconds = fit.seconds;
          output = std::move(fit.output);
          fs::create_directories(opts.report_dir / "loss");
          fs::create_directories(opts.report_dir / "images");
          write_loss_csv(opts.report_dir / "loss" / (e.id + ".csv"), fit.history);
          write_png(opts.report_dir / "images" / (e.id + ".png"), output);
        }
        r.psnr_output = psnr(output, clean);
        r.ssim_output = ssim(output, clean);
        if (!std::isfinite(r.psnr_output) || !std::isfinite(r.ssim_output)) throw NumericError("non-finite metric");
        {
          std::lock_guard lock(log_mu);
          std::cerr << "[" << e.id << "] " << fixed(r.psnr_input, 2) << " -> " << fixed(r.psnr_output, 2) << " dB, "
                    << fixed(r.seconds, 1) << " s\n";
        }
        slots[i] = std::move(r);
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(pairs.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EvalResult res;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (slots[i]) res.records.push_back(std::move(*slots[i]));
    else res.failures.push_back({pairs[i].id, errors[i]});
  }
  write_records_csv(opts.report_dir / "records.csv", res.records);
  auto md = open_out(opts.report_dir / "report.md");
  md << eval_markdown(res.records, opts.external_dir ? std::string("external") : opts.variant);
  return res;
}

// ---- ablate ----------------------------------------------------------------

std::vector<AblationVariant> ablation_variants(const std::string& study, const TrainConfig& base) {
  std::vector<AblationVariant> out;
  auto add = [&](std::string label, auto mutate) {
    TrainConfig c = base;
    mutate(c);
    out.push_back({std::move(label), c});
  };
  if (study == "fill") {
    add("LF filling", [](TrainConfig& c) { c.rsfm.fill = FillRegion::Low; });
    add("HF filling", [](TrainConfig& c) { c.rsfm.fill = FillRegion::High; });
  } else if (study == "reorg") {
    add("full", [](TrainConfig& c) { c.network.reorganize = true; });
    add("w/o reorganization", [](TrainConfig& c) { c.network.reorganize = false; });
  } else if (study == "color") {
    add("full", [](TrainConfig& c) { c.network.color_conversion = true; });
    add("w/o colour conversion", [](TrainConfig& c) { c.network.color_conversion = false; });
  } else if (study == "kernel") {
    for (int k : {3, 5, 7, 9}) add(std::to_string(k) + "x" + std::to_string(k), [k](TrainConfig& c) { c.rsfm.window = k; });
  } else {
    throw InvalidInput("unknown study '" + study + "' (expected fill, reorg, color or kernel)");
  }
  return out;
}

namespace {

std::string slug(const std::string& label) {
  std::string s;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (!s.empty() && s.back() != '_') s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

}  // namespace

AblationResult run_ablation(const std::string& study, const EvalOptions& base) {
  const auto variants = ablation_variants(study, base.config);
  const auto refs = reference_rows(study);
  AblationResult res;
  for (const auto& v : variants) {
    EvalOptions o = base;
    o.config = v.config;
    o.variant = v.label;
    o.external_dir.reset();
    o.report_dir = base.report_dir / slug(v.label);
    EvalResult r = run_eval(o);
    for (auto& f : r.failures) res.failures.push_back({v.label + "/" + f.id, f.message});
    res.rows.emplace_back(v.label, std::move(r.records));
  }

  std::ostringstream md;
  md << "| variant |";
  for (Scenario s : kAllScenarios) md << ' ' << to_string(s) << " PSNR / SSIM |";
  md << "\n|---|---|---|---|\n";
  auto scenario_cell = [](const std::vector<ScenarioMean>& means, Scenario s) -> std::string {
    for (const auto& m : means)
      if (m.scenario == s) return cell({m.psnr_output, m.ssim_output});
    return "-";
  };
  for (const auto& [label, records] : res.rows) {
    const auto means = scenario_means(records);
    md << "| " << label << " |";
    for (Scenario s : kAllScenarios) md << ' ' << scenario_cell(means, s) << " |";
    md << "\n";
  }
  for (const auto& ref : refs) {
    md << "| published: " << ref.label << " |";
    for (const auto& c : ref.cells) md << ' ' << cell(c) << " |";
    md << "\n";
  }
  auto mdf = open_out(base.report_dir / "ablation.md");
  mdf << md.str();

  auto csv = open_out(base.report_dir / "ablation.csv");
  csv << "variant,scenario,count,psnr_input,ssim_input,psnr_output,ssim_output,seconds\n";
  for (const auto& [label, records] : res.rows)
    for (const auto& m : scenario_means(records))
      csv << label << ',' << to_string(m.scenario) << ',' << m.count << ',' << num(m.psnr_input) << ','
          << num(m.ssim_input) << ',' << num(m.psnr_output) << ',' << num(m.ssim_output) << ',' << num(m.seconds)
          << "\n";
  return res;
}

// ---- report ----------------------------------------------------------------

std::vector<ReportRow> aggregate_runs(const fs::path& runs_dir) {
  if (!fs::is_directory(runs_dir)) throw LoadError("not a directory: " + runs_dir.string());
  std::vector<fs::path> files;
  for (const auto& ent : fs::recursive_directory_iterator(runs_dir)) {
    if (ent.is_regular_file() && ent.path().extension() == ".csv" && has_record_header(ent.path())) {
      files.push_back(ent.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::map<std::string, std::vector<RunRecord>> groups;
  std::vector<std::string> order;
  for (const auto& f : files)
    for (auto& r : read_records_csv(f)) {
      if (!groups.count(r.config_hash)) order.push_back(r.config_hash);
      groups[r.config_hash].push_back(std::move(r));
    }

  std::vector<ReportRow> rows;
  for (const auto& key : order) {
    const auto& recs = groups[key];
    ReportRow row;
    row.config_hash = key;
    row.label = recs.front().variant;
    row.count = static_cast<int>(recs.size());
    for (const auto& r : recs) {
      row.mean_psnr += r.psnr_output;
      row.mean_ssim += r.ssim_output;
    }
    row.mean_psnr /= row.count;
    row.mean_ssim /= row.count;
    row.scenarios = scenario_means(recs);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) { return a.mean_psnr > b.mean_psnr; });
  return rows;
}

std::string report_markdown(const std::vector<ReportRow>& rows) {
  // Column c: 0/1 overall psnr/ssim, then 2+2s / 3+2s per scenario.
  auto value = [](const ReportRow& r, int c) -> std::optional<double> {
    if (c == 0) return r.mean_psnr;
    if (c == 1) return r.mean_ssim;
    const auto s = static_cast<Scenario>((c - 2) / 2);
    for (const auto& m : r.scenarios)
      if (m.scenario == s) return (c % 2 == 0) ? m.psnr_output : m.ssim_output;
    return std::nullopt;
  };
  constexpr int kCols = 8;
  std::array<double, kCols> best;
  best.fill(-1e300);
  for (const auto& r : rows)
    for (int c = 0; c < kCols; ++c)
      if (auto v = value(r, c)) best[c] = std::max(best[c], *v);

  std::ostringstream md;
  md << "| variant | config | n | PSNR | SSIM |";
  for (Scenario s : kAllScenarios) md << ' ' << to_string(s) << " PSNR | " << to_string(s) << " SSIM |";
  md << "\n|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    md << "| " << r.label << " | " << r.config_hash << " | " << r.count << " |";
    for (int c = 0; c < kCols; ++c) {
      const auto v = value(r, c);
      if (!v) {
        md << " - |";
        continue;
      }
      const std::string text = fixed(*v, c % 2 == 0 ? 2 : 4);
      md << ' ' << (*v == best[c] ? "**" + text + "**" : text) << " |";
    }
    md << "\n";
  }
  const ReferenceRow& ref = reference_method_row();
  md << "| " << ref.label << " | - | - | - | - |";
  for (const auto& c : ref.cells) md << ' ' << fixed(c[0], 2) << " | " << fixed(c[1], 4) << " |";
  md << "\n";
  return md.str();
}

void write_report_csv(const fs::path& path, const std::vector<ReportRow>& rows) {
  auto out = open_out(path);
  out << "variant,config_hash,count,mean_psnr,mean_ssim";
  for (Scenario s : kAllScenarios) out << ',' << to_string(s) << "_psnr," << to_string(s) << "_ssim";
  out << "\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.config_hash << ',' << r.count << ',' << num(r.mean_psnr) << ',' << num(r.mean_ssim);
    for (Scenario s : kAllScenarios) {
      auto it = std::find_if(r.scenarios.begin(), r.scenarios.end(), [s](const ScenarioMean& m) { return m.scenario == s; });
      if (it == r.scenarios.end()) out << ",,";
      else out << ',' << num(it->psnr_output) << ',' << num(it->ssim_output);
    }
    out << "\n";
  }
}

}  // namespace rsf
