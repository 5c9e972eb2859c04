#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cxrseg/curation.hpp"
#include "cxrseg/error.hpp"
#include "cxrseg/rng.hpp"

using namespace cxrseg;

namespace {

ManifestRecord rec(std::string id, std::set<std::string> labels) { return {std::move(id), std::move(labels)}; }

LabelVector lv(std::initializer_list<Label> ls) {
  std::array<bool, kNumLabels> f{};
  for (auto l : ls) f[index_of(l)] = true;
  return LabelVector(f);
}

// Random manifest with co-labels, non-target labels, and exact No Finding rows.
std::vector<ManifestRecord> random_manifest(std::size_t n, std::uint64_t seed) {
  CounterRng r(seed, 31);
  std::vector<ManifestRecord> out;
  const std::vector<std::string> names = {"Mass", "Nodule", "Pneumonia", "Edema", "Fibrosis", "Effusion", "Hernia"};
  for (std::size_t i = 0; i < n; ++i) {
    std::set<std::string> ls;
    for (const auto& nm : names)
      if (r.bernoulli(0.2)) ls.insert(nm);
    if (ls.empty()) ls.insert("No Finding");
    out.push_back(rec("r" + std::to_string(i) + ".png", ls));
  }
  return out;
}

}  // namespace

TEST(LabelVector, ExclusionEnforced) {
  std::array<bool, kNumLabels> f{};
  f[0] = true;
  f[5] = true;
  EXPECT_THROW(LabelVector{f}, ArgumentError);
  const auto nf = LabelVector::from_abnormalities({false, false, false, false, false});
  EXPECT_TRUE(nf.has(Label::NoFinding));
  const auto ab = LabelVector::from_abnormalities({false, true, false, false, false});
  EXPECT_FALSE(ab.has(Label::NoFinding));
  EXPECT_TRUE(ab.any_abnormality());
}

TEST(Labels, Parse) {
  EXPECT_EQ(parse_label("No Finding"), Label::NoFinding);
  EXPECT_EQ(parse_label("Fibrosis"), Label::Fibrosis);
  EXPECT_FALSE(parse_label("fibrosis").has_value());
}

TEST(ParseManifest, Rows) {
  const auto rows = parse_manifest(
      "Image Index,Finding Labels,Follow-up #\n"
      "a.png,Mass|Nodule,0\n"
      "b.png,No Finding,1\n"
      "c.png, Effusion | Mass ,2\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].labels, (std::set<std::string>{"Mass", "Nodule"}));
  EXPECT_EQ(rows[1].labels, (std::set<std::string>{"No Finding"}));
  EXPECT_EQ(rows[2].labels, (std::set<std::string>{"Effusion", "Mass"}));
}

TEST(ParseManifest, Errors) {
  EXPECT_THROW(parse_manifest("Image Index,Finding Labels\na.png,\n"), FormatError);
  EXPECT_THROW(parse_manifest("Image Index,Labels\na.png,Mass\n"), FormatError);
  EXPECT_THROW(parse_manifest("Image Index,Finding Labels\na.png,Mass\na.png,Nodule\n"), FormatError);
}

TEST(Curate, OneAbnormalityEach) {
  std::vector<ManifestRecord> rs;
  const std::vector<std::string> names = {"Mass", "Nodule", "Pneumonia", "Edema", "Fibrosis"};
  for (int i = 0; i < 10; ++i) rs.push_back(rec("x" + std::to_string(i), {names[static_cast<std::size_t>(i % 5)]}));
  rs.push_back(rec("n0", {"No Finding"}));
  const CuratedDataset ds = curate(rs, 2, 5);
  for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
    EXPECT_EQ(ds.drawn[k], 2u);
    EXPECT_EQ(ds.pool_size[k], 2u);
  }
  std::set<std::string> ids;
  for (const auto& r : ds.records) ids.insert(r.image_id);
  EXPECT_EQ(ids.size(), ds.records.size());
  EXPECT_EQ(ds.records.size(), 11u);
}

TEST(Curate, DeduplicatesCoLabels) {
  std::vector<ManifestRecord> rs = {rec("both", {"Mass", "Nodule"}), rec("p", {"Pneumonia"}), rec("e", {"Edema"}),
                                    rec("f", {"Fibrosis"}), rec("n", {"No Finding"})};
  const CuratedDataset ds = curate(rs, 1, 0);
  ASSERT_EQ(ds.records.size(), 5u);
  EXPECT_EQ(ds.records[0].image_id, "both");
  EXPECT_EQ(ds.records[0].labels, lv({Label::Mass, Label::Nodule}));
}

TEST(Curate, EmptyPoolNamesLabel) {
  std::vector<ManifestRecord> rs = {rec("a", {"Mass"}), rec("b", {"Nodule"}), rec("c", {"Pneumonia"}),
                                    rec("d", {"Edema"}), rec("n", {"No Finding"})};
  try {
    curate(rs, 5, 0);
    FAIL();
  } catch (const CurationError& e) {
    EXPECT_NE(std::string(e.what()).find("Fibrosis"), std::string::npos);
  }
}

TEST(Curate, NoFindingPoolIsExact) {
  // "No Finding|Hernia" is not a pure normal.
  std::vector<ManifestRecord> rs = {rec("a", {"Mass"}),     rec("b", {"Nodule"}),
                                    rec("c", {"Pneumonia"}), rec("d", {"Edema"}),
                                    rec("e", {"Fibrosis"}),  rec("n1", {"No Finding"}),
                                    rec("n2", {"No Finding", "Hernia"})};
  const CuratedDataset ds = curate(rs, 5, 0);
  EXPECT_EQ(ds.pool_size[index_of(Label::NoFinding)], 1u);
}

TEST(Curate, PropertiesOnRandomManifests) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rs = random_manifest(300, seed);
    const std::size_t cap = 10 + seed * 3;
    const CuratedDataset ds = curate(rs, cap, seed);
    std::set<std::string> ids;
    for (const auto& r : ds.records) {
      ids.insert(r.image_id);
      EXPECT_FALSE(r.labels.has(Label::NoFinding) && r.labels.any_abnormality());
    }
    EXPECT_EQ(ids.size(), ds.records.size());
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      EXPECT_EQ(ds.drawn[k], std::min(cap, ds.pool_size[k]));
    }
    // Full pools are taken whole whatever the seed.
    const auto counts = label_counts(ds);
    for (std::size_t k = 0; k < kNumAbnormalities; ++k) {
      if (ds.pool_size[k] <= cap) EXPECT_EQ(counts[k], ds.pool_size[k]);
      EXPECT_GE(counts[k], ds.drawn[k]);
    }
    // Manifest order is kept.
    std::size_t last = 0;
    for (const auto& r : ds.records) {
      const auto pos = static_cast<std::size_t>(
          std::find_if(rs.begin(), rs.end(), [&](const ManifestRecord& m) { return m.image_id == r.image_id; }) -
          rs.begin());
      EXPECT_GE(pos + 1, last);
      last = pos + 1;
    }
  }
}

TEST(Curate, Deterministic) {
  const auto rs = random_manifest(200, 3);
  const auto a = curate(rs, 15, 9);
  const auto b = curate(rs, 15, 9);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].image_id, b.records[i].image_id);
  const auto c = curate(rs, 15, 10);
  bool differs = c.records.size() != a.records.size();
  for (std::size_t i = 0; !differs && i < a.records.size(); ++i) differs = a.records[i].image_id != c.records[i].image_id;
  EXPECT_TRUE(differs);
}

TEST(SplitSizes, ReportedCounts) {
  EXPECT_EQ(split_sizes(10486), (SplitSizes{7340, 1573, 1573}));
  EXPECT_EQ(split_sizes(10), (SplitSizes{7, 2, 1}));
}

TEST(Split, PartitionAndDeterminism) {
  std::vector<std::string> ids;
  for (int i = 0; i < 101; ++i) ids.push_back("i" + std::to_string(i));
  const auto a = split_ids(ids, {}, 4);
  const auto b = split_ids(ids, {}, 4);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 71u);
  EXPECT_EQ(a.validation.size(), 15u);
  EXPECT_EQ(a.test.size(), 15u);
  std::set<std::string> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all.size(), 101u);
  EXPECT_NE(split_ids(ids, {}, 5).train, a.train);
  EXPECT_THROW(split_ids({"a", "b"}, {}, 0), ArgumentError);
}

TEST(Cooccurrence, Examples) {
  EXPECT_EQ(cooccurrence({}), CooccurrenceMatrix{});
  const auto one = cooccurrence({lv({Label::Mass, Label::Nodule})});
  EXPECT_EQ(one(0, 1), 1u);
  EXPECT_EQ(one(1, 0), 1u);
  EXPECT_EQ(one(0, 0), 1u);
  EXPECT_EQ(one(1, 1), 1u);
  const auto three = cooccurrence({lv({Label::Mass}), lv({Label::Mass, Label::Nodule}), lv({Label::NoFinding})});
  const std::array<std::size_t, 6> diag = {2, 1, 0, 0, 0, 1};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(three(i, i), diag[i]);
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      const bool mn = (i == 0 && j == 1) || (i == 1 && j == 0);
      EXPECT_EQ(three(i, j), mn ? 1u : 0u);
    }
  }
}

TEST(CuratedCsv, RoundTrip) {
  const auto rs = random_manifest(60, 8);
  const auto ds = curate(rs, 8, 1);
  std::vector<SplitAssignment> splits = {split(ds, {}, 0), split(ds, {}, 7)};
  const std::string text = curated_csv(ds, splits);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "image_id,Mass,Nodule,Pneumonia,Edema,Fibrosis,No Finding,split_0,split_7");
  const CuratedManifest m = parse_curated_csv(text);
  ASSERT_EQ(m.records.size(), ds.records.size());
  EXPECT_EQ(m.split_seeds, (std::vector<std::uint64_t>{0, 7}));
  for (std::size_t i = 0; i < ds.records.size(); ++i) EXPECT_EQ(m.records[i].labels, ds.records[i].labels);
  for (std::size_t s = 0; s < 2; ++s) {
    auto got = m.assignment(s);
    auto want = splits[s];
    std::sort(got.train.begin(), got.train.end());
    std::sort(want.train.begin(), want.train.end());
    EXPECT_EQ(got.train, want.train);
    EXPECT_EQ(got.test.size(), want.test.size());
  }
  EXPECT_THROW(parse_curated_csv("image_id,Mass\nx,1\n"), FormatError);
}
