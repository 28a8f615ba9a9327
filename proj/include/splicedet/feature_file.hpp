#pragma once

#include "splicedet/evaluation.hpp"

#include <filesystem>

namespace splicedet {

/// SPLF1 binary feature file: magic "SPLF1", u32 version, u64 row count,
/// u32 dim, then f32 rows. A JSON sidecar (<path>.json) carries the schema
/// names/groups and per-row provenance.
void save_feature_file(const PatchTable& table, const std::filesystem::path& path);

struct FeatureFile {
  Matrix rows;  // f32 on disk, widened to double
  FeatureSchema schema;
  std::vector<std::string> row_image;
  std::vector<int> row_labels;
};

FeatureFile load_feature_file(const std::filesystem::path& path);

}  // namespace splicedet
