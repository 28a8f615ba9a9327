#pragma once

#include "splicedet/image.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace splicedet {

struct DatasetImage {
  std::string id;  // file stem, unique within the dataset
  std::filesystem::path path;
  bool tampered = false;
  std::filesystem::path mask_path;  // empty when no mask exists
};

/// Scans a dataset directory. Two layouts are recognized and may coexist:
///   - authentic/ and tampered/ subdirectories, with masks/<stem>.png;
///   - CASIA-style naming: stems starting with Au_ are authentic, Tp_
///     tampered, anywhere under the root.
/// Results are sorted by id so downstream seeding ignores file order.
std::vector<DatasetImage> scan_dataset(const std::filesystem::path& root);

/// SHA-256 over the sorted per-file hashes of all images and masks.
std::string dataset_fingerprint(const std::vector<DatasetImage>& images);

}  // namespace splicedet
