#pragma once

// Planted-signal chest-film stand-ins for end-to-end runs: a bright body, a
// dark lung field, and one faint bilateral blob pair per abnormality.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cxrseg/imaging.hpp"
#include "cxrseg/morphology.hpp"

namespace synth {

struct Options {
  std::size_t count = 500;
  std::size_t side = 32;
  std::uint64_t seed = 7;
  double prevalence = 0.25;        // per abnormality, independent
  double extra_label_rate = 0.10;  // a non-target co-label such as "Effusion"
};

struct Case {
  std::string image_id;
  std::set<std::string> labels;
  cxrseg::GrayImage image;
  cxrseg::BinaryMask lung;  // ground-truth lung field
};

std::vector<Case> generate(const Options& opt);

struct Layout {
  std::filesystem::path root;
  std::filesystem::path manifest;   // root/manifest.csv
  std::filesystem::path image_dir;  // root/images
  std::filesystem::path mask_dir;   // root/masks, "<id>.mask.png"
};

/// Writes images, lung masks, and a manifest with "Image Index" and
/// "Finding Labels" columns. Masks are omitted for ids in `skip_masks`.
Layout write(const std::filesystem::path& root, const std::vector<Case>& cases,
             const std::set<std::string>& skip_masks = {});

}  // namespace synth
