#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace cxrseg::cli {

using nlohmann::json;

std::string_view variant_name(MaskVariant v) noexcept {
  switch (v) {
    case MaskVariant::None: return "none";
    case MaskVariant::Tight: return "tight";
    case MaskVariant::Loose: return "loose";
  }
  return "none";
}

MaskVariant parse_variant(std::string_view s) {
  if (s == "none") return MaskVariant::None;
  if (s == "tight") return MaskVariant::Tight;
  if (s == "loose") return MaskVariant::Loose;
  throw ConfigError(fmt::format("unknown mask variant \"{}\" (expected none, tight, or loose)", s));
}

std::filesystem::path PipelineConfig::curated_path() const {
  return curated_manifest.empty() ? output_dir / "curated.csv" : curated_manifest;
}

std::string PipelineConfig::effective_report_name() const {
  if (!report_name.empty()) return report_name;
  if (!external_scores.empty()) return "external";
  return std::string(variant_name(variant));
}

std::filesystem::path PipelineConfig::report_dir() const {
  return output_dir / "reports" / effective_report_name();
}

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("\"{}\" must be a JSON object", where));
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown config key \"{}{}\"", where.empty() ? "" : fmt::format("{}.", where), key));
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key \"{}\": {}", key, e.what()));
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& out) {
  std::string s;
  read(obj, key, s);
  if (!s.empty()) out = s;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  check_keys(doc,
             {"manifest", "image_dir", "mask_dir", "output_dir", "curated_manifest", "external_scores",
              "report_name", "seed", "curation", "morphology", "variant", "train", "augmentation", "split_seeds",
              "split_fractions", "alpha", "fallback_segmenter", "fallback_threshold", "fallback_box_margin",
              "workers", "mantel_permutations"},
             "");
  PipelineConfig cfg;
  read_path(doc, "manifest", cfg.manifest);
  read_path(doc, "image_dir", cfg.image_dir);
  read_path(doc, "mask_dir", cfg.mask_dir);
  read_path(doc, "output_dir", cfg.output_dir);
  read_path(doc, "curated_manifest", cfg.curated_manifest);
  read(doc, "external_scores", cfg.external_scores);
  read(doc, "report_name", cfg.report_name);
  read(doc, "seed", cfg.seed);
  if (doc.contains("curation")) {
    const auto& c = doc["curation"];
    check_keys(c, {"cap"}, "curation");
    read(c, "cap", cfg.curation_cap);
  }
  if (doc.contains("morphology")) {
    const auto& m = doc["morphology"];
    check_keys(m, {"erode_radius", "tight_radius", "loose_radius"}, "morphology");
    read(m, "erode_radius", cfg.radii.erode);
    read(m, "tight_radius", cfg.radii.tight);
    read(m, "loose_radius", cfg.radii.loose);
  }
  if (doc.contains("variant")) {
    std::string v;
    read(doc, "variant", v);
    cfg.variant = parse_variant(v);
  }
  if (doc.contains("train")) {
    const auto& t = doc["train"];
    check_keys(t,
               {"learning_rate", "batch_size", "max_epochs", "adam_beta1", "adam_beta2", "adam_epsilon",
                "early_stop_patience", "input_side", "hidden_units"},
               "train");
    read(t, "learning_rate", cfg.train.learning_rate);
    read(t, "batch_size", cfg.train.batch_size);
    read(t, "max_epochs", cfg.train.max_epochs);
    read(t, "adam_beta1", cfg.train.adam_beta1);
    read(t, "adam_beta2", cfg.train.adam_beta2);
    read(t, "adam_epsilon", cfg.train.adam_epsilon);
    read(t, "early_stop_patience", cfg.train.early_stop_patience);
    read(t, "input_side", cfg.train.input_side);
    read(t, "hidden_units", cfg.train.hidden_units);
  }
  if (doc.contains("augmentation")) {
    const auto& a = doc["augmentation"];
    check_keys(a, {"flip_probability", "max_rotation_degrees", "max_intensity_fraction"}, "augmentation");
    read(a, "flip_probability", cfg.augmentation.flip_probability);
    read(a, "max_rotation_degrees", cfg.augmentation.max_rotation_degrees);
    read(a, "max_intensity_fraction", cfg.augmentation.max_intensity_fraction);
  }
  read(doc, "split_seeds", cfg.split_seeds);
  if (doc.contains("split_fractions")) {
    std::vector<double> f;
    read(doc, "split_fractions", f);
    if (f.size() != 3) throw ConfigError("split_fractions must have three entries");
    cfg.split_fractions = {f[0], f[1], f[2]};
  }
  read(doc, "alpha", cfg.alpha);
  read(doc, "fallback_segmenter", cfg.fallback_segmenter);
  read(doc, "fallback_threshold", cfg.fallback_threshold);
  read(doc, "fallback_box_margin", cfg.fallback_box_margin);
  read(doc, "workers", cfg.workers);
  read(doc, "mantel_permutations", cfg.mantel_permutations);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const PipelineConfig& cfg) {
  if (cfg.split_seeds.empty()) throw ConfigError("split_seeds must not be empty");
  std::set<std::uint64_t> unique(cfg.split_seeds.begin(), cfg.split_seeds.end());
  if (unique.size() != cfg.split_seeds.size()) throw ConfigError("split_seeds must be distinct");
  if (cfg.radii.erode < 0 || cfg.radii.tight < 0 || cfg.radii.loose < 0) {
    throw ConfigError("morphology radii must be non-negative");
  }
  if (cfg.curation_cap < 1) throw ConfigError("curation.cap must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (!(cfg.augmentation.flip_probability >= 0.0 && cfg.augmentation.flip_probability <= 1.0) ||
      !(cfg.augmentation.max_rotation_degrees >= 0.0 && cfg.augmentation.max_rotation_degrees <= 45.0) ||
      !(cfg.augmentation.max_intensity_fraction >= 0.0 && cfg.augmentation.max_intensity_fraction < 1.0)) {
    throw ConfigError("augmentation settings out of range");
  }
  try {
    cfg.train.validate();
    (void)split_sizes(100, cfg.split_fractions);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  for (const auto* p : {&cfg.manifest, &cfg.image_dir, &cfg.mask_dir, &cfg.curated_manifest}) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      throw ConfigError(fmt::format("path does not exist: {}", p->string()));
    }
  }
}

std::string config_reference() {
  return R"(manifest             path   label manifest CSV ("Image Index", "Finding Labels")
image_dir            path   source images (PNG/BMP), file name = image id
mask_dir             path   raw lung masks, <image_id>.mask.png
output_dir           path   all outputs (default cxrseg_out)
curated_manifest     path   curated CSV (default <output_dir>/curated.csv)
external_scores      string score CSV path; "{seed}" expands to the split seed
report_name          string report directory name (default: variant or "external")
seed                 int    curation sampling and model initialisation seed
curation.cap         int    per-label sampling cap (2000)
morphology.erode_radius / tight_radius / loose_radius   int (5 / 15 / 50)
variant              string none | tight | loose
train.learning_rate, batch_size, max_epochs, adam_beta1, adam_beta2,
      adam_epsilon, early_stop_patience, input_side, hidden_units
augmentation.flip_probability, max_rotation_degrees, max_intensity_fraction
split_seeds          [int]  matched split seeds (default [0,1,2,3,4])
split_fractions      [3]    train/validation/test (default [0.7,0.15,0.15])
alpha                float  significance level (0.05)
fallback_segmenter   bool   threshold segmenter instead of mask files
fallback_threshold   float  intensity cut for the fallback segmenter (0.4)
fallback_box_margin  float  prompt box inset per side (0.05)
workers              int    per-image worker threads (1)
mantel_permutations  int    Monte Carlo draws when a matrix has more than 7 labels
)";
}

}  // namespace cxrseg::cli
