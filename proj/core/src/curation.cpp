#include "cxrseg/curation.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "cxrseg/csv.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

namespace cxrseg {

namespace {

constexpr std::string_view kImageColumn = "Image Index";
constexpr std::string_view kLabelsColumn = "Finding Labels";
constexpr std::uint64_t kCurationStream = 0x63757261ULL;  // "cura"
constexpr std::uint64_t kSplitStream = 0x73706c74ULL;     // "splt"

}  // namespace

std::vector<ManifestRecord> parse_manifest(std::string_view csv_text) {
  const csv::Table table = csv::parse(csv_text);
  const auto id_col = table.column(kImageColumn);
  if (!id_col) throw FormatError(fmt::format("manifest is missing required column \"{}\"", kImageColumn));
  const auto label_col = table.column(kLabelsColumn);
  if (!label_col) throw FormatError(fmt::format("manifest is missing required column \"{}\"", kLabelsColumn));

  std::vector<ManifestRecord> records;
  records.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    ManifestRecord rec;
    rec.image_id = row[*id_col];
    if (rec.image_id.empty()) throw FormatError(fmt::format("line {}: empty image id", line));
    if (!seen.insert(rec.image_id).second) {
      throw FormatError(fmt::format("line {}: duplicate image id \"{}\"", line, rec.image_id));
    }
    std::string_view cell = row[*label_col];
    std::size_t start = 0;
    while (start <= cell.size()) {
      const std::size_t bar = cell.find('|', start);
      const std::size_t end = bar == std::string_view::npos ? cell.size() : bar;
      std::string token = csv::trim(cell.substr(start, end - start));
      if (!token.empty()) rec.labels.insert(std::move(token));
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
    if (rec.labels.empty()) {
      throw FormatError(fmt::format("line {}: image \"{}\" has an empty label cell", line, rec.image_id));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

CuratedDataset curate(const std::vector<ManifestRecord>& records, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw ArgumentError("per-label cap must be at least 1");

  std::array<std::vector<std::size_t>, kNumLabels> pools;
  const std::string no_finding(kLabelNames[index_of(Label::NoFinding)]);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& labels = records[i].labels;
    for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
      if (labels.count(std::string(kLabelNames[k]))) pools[k].push_back(i);
    }
    if (labels.size() == 1 && *labels.begin() == no_finding) pools[index_of(Label::NoFinding)].push_back(i);
  }

  CuratedDataset ds;
  ds.seed = seed;
  ds.per_label_cap = cap;
  std::vector<bool> selected(records.size(), false);
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    auto& pool = pools[k];
    if (pool.empty()) throw CurationError(fmt::format("candidate pool for \"{}\" is empty", kLabelNames[k]));
    ds.pool_size[k] = pool.size();
    const std::size_t take = std::min(cap, pool.size());
    // Partial Fisher-Yates: the first `take` slots become a uniform sample without replacement.
    CounterRng rng(derive_stream(seed, kCurationStream), k);
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      selected[pool[i]] = true;
    }
    ds.drawn[k] = take;
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!selected[i]) continue;
    std::array<bool, kNumLabels> flags{};
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      flags[k] = records[i].labels.count(std::string(kLabelNames[k])) > 0;
    }
    ds.records.push_back({records[i].image_id, LabelVector(flags)});
  }
  return ds;
}

std::array<std::size_t, kNumLabels> label_counts(const CuratedDataset& ds) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& r : ds.records) {
    for (std::size_t k = 0; k < kNumLabels; ++k) counts[k] += r.labels[k] ? 1 : 0;
  }
  return counts;
}

std::string_view split_role_name(SplitRole r) noexcept {
  switch (r) {
    case SplitRole::Train: return "train";
    case SplitRole::Validation: return "validation";
    case SplitRole::Test: return "test";
  }
  return "unknown";
}

SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions) {
  const double total = fractions.train + fractions.validation + fractions.test;
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
  if (fractions.train < 0 || fractions.validation < 0 || fractions.test < 0) {
    throw ArgumentError("split fractions must be non-negative");
  }
  SplitSizes s;
  s.train = static_cast<std::size_t>(std::lround(fractions.train * static_cast<double>(n)));
  s.validation = static_cast<std::size_t>(std::lround(fractions.validation * static_cast<double>(n)));
  if (s.train + s.validation > n) throw ArgumentError("split fractions leave no room for the test set");
  s.test = n - s.train - s.validation;
  return s;
}

SplitAssignment split_ids(const std::vector<std::string>& ids, const SplitFractions& fractions,
                          std::uint64_t seed) {
  if (ids.size() < 3) throw ArgumentError("splitting needs at least 3 images");
  const SplitSizes sizes = split_sizes(ids.size(), fractions);
  CounterRng rng(derive_stream(seed, kSplitStream), 0);
  const auto order = random_permutation(ids.size(), rng);
  SplitAssignment a;
  a.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& id = ids[order[i]];
    if (i < sizes.train) {
      a.train.push_back(id);
    } else if (i < sizes.train + sizes.validation) {
      a.validation.push_back(id);
    } else {
      a.test.push_back(id);
    }
  }
  return a;
}

SplitAssignment split(const CuratedDataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(ds.records.size());
  for (const auto& r : ds.records) ids.push_back(r.image_id);
  return split_ids(ids, fractions, seed);
}

CooccurrenceMatrix cooccurrence(const std::vector<LabelVector>& labels) {
  CooccurrenceMatrix m;
  for (const auto& v : labels) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (!v[i]) continue;
      for (std::size_t j = 0; j < kNumLabels; ++j) {
        if (v[j]) ++m.counts[i][j];
      }
    }
  }
  return m;
}

std::string cooccurrence_csv(const CooccurrenceMatrix& m) {
  std::string out = "label";
  for (auto name : kLabelNames) out += fmt::format(",{}", name);
  out += '\n';
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    out += kLabelNames[i];
    for (std::size_t j = 0; j < kNumLabels; ++j) out += fmt::format(",{}", m.counts[i][j]);
    out += '\n';
  }
  return out;
}

std::string curated_csv(const CuratedDataset& ds, const std::vector<SplitAssignment>& splits) {
  std::vector<std::unordered_map<std::string, SplitRole>> roles(splits.size());
  for (std::size_t s = 0; s < splits.size(); ++s) {
    for (const auto& id : splits[s].train) roles[s][id] = SplitRole::Train;
    for (const auto& id : splits[s].validation) roles[s][id] = SplitRole::Validation;
    for (const auto& id : splits[s].test) roles[s][id] = SplitRole::Test;
  }
  std::vector<std::string> header = {"image_id"};
  for (auto name : kLabelNames) header.emplace_back(name);
  for (const auto& s : splits) header.push_back(fmt::format("split_{}", s.seed));
  std::string out = csv::join_row(header) + '\n';
  for (const auto& r : ds.records) {
    std::vector<std::string> row = {r.image_id};
    for (std::size_t k = 0; k < kNumLabels; ++k) row.emplace_back(r.labels[k] ? "1" : "0");
    for (std::size_t s = 0; s < splits.size(); ++s) {
      const auto it = roles[s].find(r.image_id);
      if (it == roles[s].end()) {
        throw ArgumentError(fmt::format("image \"{}\" is missing from split {}", r.image_id, splits[s].seed));
      }
      row.emplace_back(split_role_name(it->second));
    }
    out += csv::join_row(row) + '\n';
  }
  return out;
}

SplitAssignment CuratedManifest::assignment(std::size_t split_index) const {
  SplitAssignment a;
  a.seed = split_seeds.at(split_index);
  const auto& r = roles.at(split_index);
  for (std::size_t i = 0; i < records.size(); ++i) {
    switch (r[i]) {
      case SplitRole::Train: a.train.push_back(records[i].image_id); break;
      case SplitRole::Validation: a.validation.push_back(records[i].image_id); break;
      case SplitRole::Test: a.test.push_back(records[i].image_id); break;
    }
  }
  return a;
}

CuratedManifest parse_curated_csv(std::string_view csv_text) {
  const csv::Table table = csv::parse(csv_text);
  const auto id_col = table.column("image_id");
  if (!id_col) throw FormatError("curated manifest is missing column \"image_id\"");
  std::array<std::size_t, kNumLabels> label_cols{};
  for (std::size_t k = 0; k < kNumLabels; ++k) {
    const auto c = table.column(kLabelNames[k]);
    if (!c) throw FormatError(fmt::format("curated manifest is missing column \"{}\"", kLabelNames[k]));
    label_cols[k] = *c;
  }
  CuratedManifest m;
  std::vector<std::size_t> split_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h.rfind("split_", 0) != 0) continue;
    try {
      std::size_t used = 0;
      const auto seed = std::stoull(h.substr(6), &used);
      if (used != h.size() - 6) throw std::invalid_argument(h);
      m.split_seeds.push_back(seed);
      split_cols.push_back(c);
    } catch (const std::exception&) {
      throw FormatError(fmt::format("curated manifest column \"{}\" is not split_<seed>", h));
    }
  }
  m.roles.resize(split_cols.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (!seen.insert(row[*id_col]).second) {
      throw FormatError(fmt::format("line {}: duplicate image id \"{}\"", line, row[*id_col]));
    }
    std::array<bool, kNumLabels> flags{};
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      const auto& v = row[label_cols[k]];
      if (v != "0" && v != "1") throw FormatError(fmt::format("line {}: flag \"{}\" is not 0/1", line, v));
      flags[k] = v == "1";
    }
    try {
      m.records.push_back({row[*id_col], LabelVector(flags)});
    } catch (const ArgumentError& e) {
      throw FormatError(fmt::format("line {}: {}", line, e.what()));
    }
    for (std::size_t s = 0; s < split_cols.size(); ++s) {
      const auto& v = row[split_cols[s]];
      SplitRole role{};
      if (v == "train") {
        role = SplitRole::Train;
      } else if (v == "validation") {
        role = SplitRole::Validation;
      } else if (v == "test") {
        role = SplitRole::Test;
      } else {
        throw FormatError(fmt::format("line {}: unknown split role \"{}\"", line, v));
      }
      m.roles[s].push_back(role);
    }
  }
  return m;
}

}  // namespace cxrseg
