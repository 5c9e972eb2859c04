#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cxrseg/csv.hpp"
#include "cxrseg/imaging.hpp"
#include "cxrseg/model.hpp"
#include "cxrseg/morphology.hpp"
#include "cxrseg/report.hpp"
#include "cxrseg/rng.hpp"
#include "cxrseg/segmenter.hpp"

namespace cxrseg::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainSeedStream = 0x7472616eULL;  // "tran"
constexpr std::uint64_t kAugSeedStream = 0x61756773ULL;    // "augs"

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Runs fn(i) for i in [0, n) on `workers` threads. The first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const std::string name = p.filename().string();
  if (name.size() > 9 && name.compare(name.size() - 9, 9, ".mask.png") == 0) return false;
  return ext == ".png" || ext == ".bmp";
}

std::string expand_seed(const std::string& pattern, std::uint64_t seed) {
  std::string out = pattern;
  const std::string token = "{seed}";
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
    out.replace(pos, token.size(), std::to_string(seed));
  }
  return out;
}

}  // namespace

fs::path variant_dir(const PipelineConfig& cfg, MaskVariant v) {
  switch (v) {
    case MaskVariant::None: return cfg.image_dir;
    case MaskVariant::Tight: return cfg.output_dir / "masked" / "tight";
    case MaskVariant::Loose: return cfg.output_dir / "masked" / "loose";
  }
  return cfg.image_dir;
}

std::string masked_file_name(const std::string& image_id) { return fs::path(image_id).stem().string() + ".png"; }

// ---------------------------------------------------------------------------

CurateOutputs cmd_curate(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.manifest.empty()) throw ConfigError("config key \"manifest\" is required for curate");
  if (!fs::exists(cfg.manifest)) throw ConfigError(fmt::format("manifest not found: {}", cfg.manifest.string()));
  const auto records = parse_manifest(read_text(cfg.manifest));

  CurateOutputs out;
  out.dataset = curate(records, cfg.curation_cap, cfg.seed);
  for (auto s : cfg.split_seeds) out.splits.push_back(split(out.dataset, cfg.split_fractions, s));
  std::vector<LabelVector> labels;
  labels.reserve(out.dataset.records.size());
  for (const auto& r : out.dataset.records) labels.push_back(r.labels);
  out.cooccurrence = cooccurrence(labels);

  write_text(cfg.output_dir / "curated.csv", curated_csv(out.dataset, out.splits));
  write_text(cfg.output_dir / "cooccurrence.csv", cooccurrence_csv(out.cooccurrence));

  const auto counts = label_counts(out.dataset);
  std::string summary = "label,pool_size,drawn,final_count\n";
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    summary += fmt::format("{},{},{},{}\n", kLabelNames[k], out.dataset.pool_size[k], out.dataset.drawn[k], counts[k]);
  }
  summary += fmt::format("Total Unique Images,,,{}\n", out.dataset.records.size());
  write_text(cfg.output_dir / "curation_summary.csv", summary);

  log << fmt::format("curated {} unique images from {} manifest rows (cap {}, seed {})\n",
                     out.dataset.records.size(), records.size(), cfg.curation_cap, cfg.seed);
  for (const auto& s : out.splits) {
    log << fmt::format("  split {}: train {}, validation {}, test {}\n", s.seed, s.train.size(), s.validation.size(),
                       s.test.size());
  }
  return out;
}

// ---------------------------------------------------------------------------

MaskSummary cmd_mask(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.image_dir.empty() || !fs::is_directory(cfg.image_dir)) {
    throw ConfigError(fmt::format("image_dir is not a directory: {}", cfg.image_dir.string()));
  }
  if (!cfg.fallback_segmenter && (cfg.mask_dir.empty() || !fs::is_directory(cfg.mask_dir))) {
    throw ConfigError("mask_dir must name a directory unless --fallback-segmenter is given");
  }
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(cfg.image_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());

  const fs::path tight_dir = variant_dir(cfg, MaskVariant::Tight);
  const fs::path loose_dir = variant_dir(cfg, MaskVariant::Loose);
  fs::create_directories(tight_dir);
  fs::create_directories(loose_dir);

  enum class Status { Ok, Skipped, Failed };
  struct Outcome {
    Status status = Status::Ok;
    std::string detail;
  };
  std::vector<Outcome> outcomes(images.size());

  parallel_for(images.size(), cfg.workers, [&](std::size_t i) {
    const std::string id = images[i].filename().string();
    Outcome& o = outcomes[i];
    try {
      const GrayImage img = load_image(images[i]);
      BinaryMask raw;
      if (cfg.fallback_segmenter) {
        raw = fallback_segment(img, inset_box(img.width(), img.height(), cfg.fallback_box_margin),
                               cfg.fallback_threshold);
      } else {
        const fs::path mask_path = cfg.mask_dir / (id + ".mask.png");
        if (!fs::exists(mask_path)) {
          o = {Status::Skipped, "no mask " + mask_path.filename().string()};
          return;
        }
        raw = load_mask(read_file(mask_path), img.width(), img.height(), mask_path.string());
      }
      const MaskVariants v = expand_mask(raw, cfg.radii);
      save_png(tight_dir / masked_file_name(id), apply_mask(img, v.tight));
      save_png(loose_dir / masked_file_name(id), apply_mask(img, v.loose));
      o = {Status::Ok, ""};
    } catch (const Error& e) {
      o = {Status::Failed, e.what()};
    }
  });

  MaskSummary summary;
  std::string report = "image_id,status,detail\n";
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string id = images[i].filename().string();
    const auto& o = outcomes[i];
    switch (o.status) {
      case Status::Ok:
        ++summary.processed;
        summary.written += 2;
        report += csv::join_row({id, "ok", ""}) + '\n';
        break;
      case Status::Skipped:
        ++summary.skipped;
        log << fmt::format("skip {}: {}\n", id, o.detail);
        report += csv::join_row({id, "skipped", o.detail}) + '\n';
        break;
      case Status::Failed:
        ++summary.failed;
        log << fmt::format("error {}: {}\n", id, o.detail);
        report += csv::join_row({id, "failed", o.detail}) + '\n';
        break;
    }
  }
  write_text(cfg.output_dir / "mask_report.csv", report);
  log << fmt::format("masked {} images ({} files), skipped {}, failed {}\n", summary.processed, summary.written,
                     summary.skipped, summary.failed);
  return summary;
}

// ---------------------------------------------------------------------------

namespace {

struct SplitData {
  std::vector<ScoreVector> validation_scores;
  std::vector<LabelVector> validation_labels;
  std::vector<ScoreVector> test_scores;
  std::vector<LabelVector> test_labels;
};

std::vector<LabelVector> labels_for(const std::vector<std::string>& ids,
                                    const std::unordered_map<std::string, LabelVector>& by_id) {
  std::vector<LabelVector> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(by_id.at(id));
  return out;
}

std::vector<ScoreVector> scores_for(const std::vector<std::string>& ids, const std::map<std::string, ScoreVector>& scores,
                                    const std::string& source) {
  std::vector<ScoreVector> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = scores.find(id);
    if (it == scores.end()) throw IngestionError(fmt::format("{} has no scores for image id \"{}\"", source, id));
    out.push_back(it->second);
  }
  return out;
}

AbnormalityFlags abnormal_flags(const LabelVector& l) {
  AbnormalityFlags f{};
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) f[k] = l[k];
  return f;
}

std::string training_log_csv(const TrainResult& r) {
  std::string out = "epoch,train_loss,validation_loss\n";
  for (const auto& e : r.log) out += fmt::format("{},{:.17g},{:.17g}\n", e.epoch, e.train_loss, e.validation_loss);
  return out;
}

std::string thresholds_csv(const ThresholdSet& t) {
  std::string out = "label,threshold\n";
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) out += fmt::format("{},{:.17g}\n", kLabelNames[k], t.abnormal[k]);
  out += fmt::format("{},{:.17g}\n", kLabelNames[index_of(Label::NoFinding)], t.no_finding);
  return out;
}

void write_roc_files(const fs::path& dir, const SplitData& d) {
  for (std::size_t k = 0; k <= kNumAbnormalities; ++k) {
    std::vector<double> s;
    std::vector<bool> y;
    for (std::size_t i = 0; i < d.test_scores.size(); ++i) {
      s.push_back(k < kNumAbnormalities ? d.test_scores[i].p[k] : no_finding_score(d.test_scores[i]));
      y.push_back(d.test_labels[i][k]);
    }
    try {
      write_text(dir / fmt::format("{}.csv", kLabelKeys[k]), roc_csv(roc_points(s, y)));
    } catch (const UndefinedMetricError&) {
      // Already recorded in the split notes via evaluate_split.
    }
  }
}

}  // namespace

ExperimentReport cmd_train_eval(const PipelineConfig& cfg, std::ostream& log) {
  const fs::path curated_path = cfg.curated_path();
  if (!fs::exists(curated_path)) {
    throw ConfigError(fmt::format("curated manifest not found: {} (run curate first)", curated_path.string()));
  }
  const CuratedManifest manifest = parse_curated_csv(read_text(curated_path));
  std::unordered_map<std::string, LabelVector> by_id;
  std::vector<LabelVector> all_labels;
  for (const auto& r : manifest.records) {
    by_id.emplace(r.image_id, r.labels);
    all_labels.push_back(r.labels);
  }
  const CooccurrenceMatrix dataset_cooc = cooccurrence(all_labels);

  std::vector<std::size_t> split_columns;
  for (auto seed : cfg.split_seeds) {
    const auto it = std::find(manifest.split_seeds.begin(), manifest.split_seeds.end(), seed);
    if (it == manifest.split_seeds.end()) {
      throw ConfigError(fmt::format("curated manifest has no split column for seed {}", seed));
    }
    split_columns.push_back(static_cast<std::size_t>(it - manifest.split_seeds.begin()));
  }

  const bool external = !cfg.external_scores.empty();
  const fs::path out_dir = cfg.report_dir();
  fs::create_directories(out_dir);

  // Training mode: every curated image, downsampled once to the model input.
  std::vector<LabeledImage> images;
  std::unordered_map<std::string, std::size_t> image_index;
  if (!external) {
    const fs::path dir = variant_dir(cfg, cfg.variant);
    if (dir.empty() || !fs::is_directory(dir)) {
      throw ConfigError(fmt::format("image directory for variant {} not found: {}", variant_name(cfg.variant), dir.string()));
    }
    images.resize(manifest.records.size());
    parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
      const auto& rec = manifest.records[i];
      const fs::path path = cfg.variant == MaskVariant::None ? dir / rec.image_id : dir / masked_file_name(rec.image_id);
      if (!fs::exists(path)) throw IngestionError(fmt::format("image for id \"{}\" not found at {}", rec.image_id, path.string()));
      images[i].image = resize(load_image(path), cfg.train.input_side, cfg.train.input_side);
      images[i].labels = abnormal_flags(rec.labels);
    });
    for (std::size_t i = 0; i < manifest.records.size(); ++i) image_index.emplace(manifest.records[i].image_id, i);
  }

  std::vector<SplitMetrics> splits;
  for (std::size_t s = 0; s < cfg.split_seeds.size(); ++s) {
    const std::uint64_t seed = cfg.split_seeds[s];
    const SplitAssignment assignment = manifest.assignment(split_columns[s]);
    if (assignment.validation.empty() || assignment.test.empty()) {
      throw ConfigError(fmt::format("split {} has an empty validation or test set", seed));
    }
    SplitData d;
    d.validation_labels = labels_for(assignment.validation, by_id);
    d.test_labels = labels_for(assignment.test, by_id);

    if (external) {
      const std::string path = expand_seed(cfg.external_scores, seed);
      if (!fs::exists(path)) throw ConfigError(fmt::format("score file not found: {}", path));
      const auto scores = load_scores(read_text(path));
      d.validation_scores = scores_for(assignment.validation, scores, path);
      d.test_scores = scores_for(assignment.test, scores, path);
    } else {
      auto indices = [&](const std::vector<std::string>& ids) {
        std::vector<std::size_t> out;
        out.reserve(ids.size());
        for (const auto& id : ids) out.push_back(image_index.at(id));
        return out;
      };
      const auto train_idx = indices(assignment.train);
      const auto val_idx = indices(assignment.validation);
      const auto test_idx = indices(assignment.test);
      TrainConfig tc = cfg.train;
      tc.seed = derive_stream(cfg.seed ^ kTrainSeedStream, seed);
      AugmentationConfig ac = cfg.augmentation;
      ac.rng_seed = derive_stream(cfg.seed ^ kAugSeedStream, seed);
      const TrainResult tr = train(images, train_idx, val_idx, tc, ac);
      write_text(out_dir / fmt::format("training_log_{}.csv", seed), training_log_csv(tr));
      const auto model_bytes = encode_params(tr.params);
      write_file(out_dir / fmt::format("model_{}.bin", seed), model_bytes);

      std::map<std::string, ScoreVector> predicted;
      auto predict = [&](const std::vector<std::size_t>& idx, const std::vector<std::string>& ids) {
        std::vector<ScoreVector> out(idx.size());
        parallel_for(idx.size(), cfg.workers, [&](std::size_t i) { out[i] = forward(tr.params, images[idx[i]].image).probs; });
        for (std::size_t i = 0; i < ids.size(); ++i) predicted.emplace(ids[i], out[i]);
        return out;
      };
      d.validation_scores = predict(val_idx, assignment.validation);
      d.test_scores = predict(test_idx, assignment.test);
      write_text(out_dir / fmt::format("scores_{}.csv", seed), scores_csv(predicted));
      log << fmt::format("split {}: trained {} epochs (best {}), validation loss {:.4f} -> {:.4f}\n", seed,
                         tr.log.size() - 1, tr.best_epoch, tr.log.front().validation_loss,
                         tr.log[tr.best_epoch].validation_loss);
    }

    const ThresholdSelection sel = select_thresholds(d.validation_scores, d.validation_labels);
    SplitMetrics m = evaluate_split(d.test_scores, d.test_labels, sel.thresholds);
    for (const auto& n : sel.notes) m.notes.insert(m.notes.begin(), fmt::format("validation {}", n));
    for (auto& n : m.notes) {
      n = fmt::format("split {}: {}", seed, n);
      log << n << '\n';
    }
    write_text(out_dir / fmt::format("thresholds_{}.csv", seed), thresholds_csv(sel.thresholds));
    write_text(out_dir / fmt::format("predicted_cooccurrence_{}.csv", seed), cooccurrence_csv(m.predicted_cooccurrence));
    write_roc_files(out_dir / "roc" / std::to_string(seed), d);
    log << fmt::format("split {}: macro AUROC {}, No Finding AUROC {}\n", seed,
                       m.macro_auroc ? fmt::format("{:.4f}", *m.macro_auroc) : "undefined",
                       m.no_finding_auroc ? fmt::format("{:.4f}", *m.no_finding_auroc) : "undefined");
    splits.push_back(std::move(m));
  }

  ExperimentReport report = aggregate(splits, cfg.split_seeds);
  const std::string name = cfg.effective_report_name();
  const std::vector<ReportColumn> columns = {{name, &report}};
  write_text(out_dir / "split_metrics.csv", split_metrics_csv(report));
  write_text(out_dir / "summary.csv", summary_csv(report));
  write_text(out_dir / "table_auroc.txt", auroc_table_text(columns));
  write_text(out_dir / "table_threshold.txt", threshold_table_text(columns));
  write_text(out_dir / "report.json", report_json(to_stored(name, report, dataset_cooc)));
  log << auroc_table_text(columns);
  return report;
}

// ---------------------------------------------------------------------------

std::vector<StatRow> cmd_compare(const StoredReport& a, const StoredReport& b, double alpha,
                                 std::size_t mantel_permutations, std::uint64_t seed) {
  if (a.split_seeds != b.split_seeds) {
    throw ArgumentError("reports were not produced on the same split seeds in the same order; pairing is invalid");
  }
  std::vector<StatRow> rows;
  for (const char* metric : {"macro_auroc", "no_finding_auroc"}) {
    const auto ia = a.metrics.find(metric);
    const auto ib = b.metrics.find(metric);
    if (ia == a.metrics.end() || ib == b.metrics.end()) throw ArgumentError(fmt::format("report lacks metric {}", metric));
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < ia->second.size(); ++i) {
      if (!ia->second[i] || !ib->second[i]) {
        throw UndefinedMetricError(fmt::format("{} is undefined in split {}", metric, a.split_seeds[i]));
      }
      x.push_back(*ia->second[i]);
      y.push_back(*ib->second[i]);
    }
    rows.push_back(to_row(fmt::format("paired_t:{}", metric), paired_t_test(x, y, alpha)));
  }
  const SquareMatrix pa = SquareMatrix::from(a.pooled_predicted());
  const SquareMatrix pb = SquareMatrix::from(b.pooled_predicted());
  auto mantel = [&](const std::string& name, const SquareMatrix& m1, const SquareMatrix& m2) {
    try {
      rows.push_back(to_row(name, mantel_test(m1, m2, mantel_permutations, seed), alpha));
    } catch (const UndefinedMetricError&) {
      rows.push_back({name, std::numeric_limits<double>::quiet_NaN(), 0, std::numeric_limits<double>::quiet_NaN(), false});
    }
  };
  mantel(fmt::format("mantel:{}_vs_{}", a.name, b.name), pa, pb);
  mantel(fmt::format("mantel:{}_vs_dataset", a.name), SquareMatrix::from(a.dataset_cooccurrence), pa);
  mantel(fmt::format("mantel:{}_vs_dataset", b.name), SquareMatrix::from(b.dataset_cooccurrence), pb);
  return rows;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation-guided chest X-ray classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string external_scores;
  bool fallback = false;
  std::optional<std::size_t> workers;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline config (JSON)")->required();
    cmd->add_option("--seed", seed, "Overrides config key seed");
    cmd->add_option("--variant", variant, "Overrides config key variant: none, tight, loose");
    cmd->add_option("--external-scores", external_scores, "Overrides config key external_scores");
    cmd->add_flag("--fallback-segmenter", fallback, "Sets config key fallback_segmenter");
    cmd->add_option("--workers", workers, "Overrides config key workers");
  };
  auto* curate_cmd = app.add_subcommand("curate", "Sample the multi-label subset and assign splits");
  auto* mask_cmd = app.add_subcommand("mask", "Write tight and loose masked images");
  auto* train_cmd = app.add_subcommand("train-eval", "Train or ingest scores and evaluate every split");
  add_common(curate_cmd);
  add_common(mask_cmd);
  add_common(train_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "Paired t-tests and Mantel tests between two reports");
  std::string report_a;
  std::string report_b;
  std::optional<double> alpha;
  std::string out_path;
  std::optional<std::size_t> permutations;
  compare_cmd->add_option("report_a", report_a, "report.json of the first setting")->required();
  compare_cmd->add_option("report_b", report_b, "report.json of the second setting")->required();
  compare_cmd->add_option("--alpha", alpha, "Significance level (default 0.05)");
  compare_cmd->add_option("--out", out_path, "Write the CSV here instead of stdout");
  compare_cmd->add_option("--mantel-permutations", permutations, "Monte Carlo draws for more than 7 labels");
  compare_cmd->add_option("--seed", seed, "Monte Carlo seed");

  std::vector<std::string> argv_store = {"cxrseg"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  }

  try {
    if (compare_cmd->parsed()) {
      const StoredReport a = load_report(report_a);
      const StoredReport b = load_report(report_b);
      const auto rows = cmd_compare(a, b, alpha.value_or(0.05), permutations.value_or(kDefaultMantelPermutations),
                                    seed.value_or(0));
      const std::string csv_text = stat_rows_csv(rows);
      if (out_path.empty()) {
        out << csv_text;
      } else {
        write_text(out_path, csv_text);
      }
      return kExitOk;
    }

    if (!fs::exists(config_path)) throw ConfigError(fmt::format("config file not found: {}", config_path));
    PipelineConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (!variant.empty()) cfg.variant = parse_variant(variant);
    if (!external_scores.empty()) cfg.external_scores = external_scores;
    if (fallback) cfg.fallback_segmenter = true;
    if (workers) cfg.workers = *workers;
    validate(cfg);

    if (curate_cmd->parsed()) {
      cmd_curate(cfg, err);
    } else if (mask_cmd->parsed()) {
      cmd_mask(cfg, err);
    } else if (train_cmd->parsed()) {
      cmd_train_eval(cfg, err);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const Error& e) {
    // Library errors other than the base class describe bad inputs.
    if (typeid(e) == typeid(Error)) {
      err << "internal error: " << e.what() << '\n';
      return kExitInternal;
    }
    err << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace cxrseg::cli
