#include "cli/report_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cli/config.hpp"

namespace cxrseg::cli {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "cxrseg-report";
constexpr int kVersion = 1;

json matrix_json(const CooccurrenceMatrix& m) {
  json rows = json::array();
  for (const auto& row : m.counts) rows.push_back(row);
  return rows;
}

CooccurrenceMatrix matrix_from(const json& j) {
  CooccurrenceMatrix m;
  if (!j.is_array() || j.size() != kNumLabels) throw FormatError("report co-occurrence matrix must be 6x6");
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (!j[i].is_array() || j[i].size() != kNumLabels) throw FormatError("report co-occurrence matrix must be 6x6");
    for (std::size_t k = 0; k < kNumLabels; ++k) m.counts[i][k] = j[i][k].get<std::size_t>();
  }
  return m;
}

}  // namespace

CooccurrenceMatrix StoredReport::pooled_predicted() const {
  CooccurrenceMatrix sum;
  for (const auto& m : predicted_cooccurrence) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      for (std::size_t j = 0; j < kNumLabels; ++j) sum.counts[i][j] += m.counts[i][j];
    }
  }
  return sum;
}

StoredReport to_stored(const std::string& name, const ExperimentReport& report, const CooccurrenceMatrix& dataset) {
  StoredReport s;
  s.name = name;
  s.split_seeds = report.split_seeds;
  for (const auto& m : report.summary) s.metrics[m.name] = m.values;
  for (const auto& split : report.splits) {
    s.predicted_cooccurrence.push_back(split.predicted_cooccurrence);
    for (const auto& n : split.notes) s.notes.push_back(n);
  }
  s.dataset_cooccurrence = dataset;
  return s;
}

std::string report_json(const StoredReport& r) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["name"] = r.name;
  doc["split_seeds"] = r.split_seeds;
  json metrics = json::object();
  for (const auto& [name, values] : r.metrics) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(v ? json(*v) : json(nullptr));
    metrics[name] = arr;
  }
  doc["metrics"] = metrics;
  json pred = json::array();
  for (const auto& m : r.predicted_cooccurrence) pred.push_back(matrix_json(m));
  doc["predicted_cooccurrence"] = pred;
  doc["dataset_cooccurrence"] = matrix_json(r.dataset_cooccurrence);
  doc["notes"] = r.notes;
  return doc.dump(2) + "\n";
}

StoredReport parse_report_json(std::string_view text) {
  StoredReport r;
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != kFormat) throw FormatError("not a cxrseg report file");
    if (doc.value("version", 0) != kVersion) throw FormatError("unsupported report version");
    r.name = doc.at("name").get<std::string>();
    r.split_seeds = doc.at("split_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& [name, values] : doc.at("metrics").items()) {
      auto& out = r.metrics[name];
      for (const auto& v : values) {
        out.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      }
      if (out.size() != r.split_seeds.size()) {
        throw FormatError(fmt::format("metric \"{}\" has {} values for {} splits", name, out.size(), r.split_seeds.size()));
      }
    }
    for (const auto& m : doc.at("predicted_cooccurrence")) r.predicted_cooccurrence.push_back(matrix_from(m));
    r.dataset_cooccurrence = matrix_from(doc.at("dataset_cooccurrence"));
    r.notes = doc.value("notes", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed report file: {}", e.what()));
  }
  return r;
}

StoredReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read report {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_report_json(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace cxrseg::cli
