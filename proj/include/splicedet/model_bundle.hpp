#pragma once

#include "splicedet/fusion.hpp"
#include "splicedet/noise_features.hpp"
#include "splicedet/siamese.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace splicedet {

/// Everything scoring needs, serialized as one artifact. Reduction order is
/// fixed: mask (variance and ablation combined) -> standardizer -> PCA -> net.
struct ModelBundle {
  FeatureSchema schema;
  FilterBank bank;
  Mask mask;
  StandardizationStats stats;
  PcaModel pca;
  EmbeddingNet net;
  double threshold = 0.0;
  std::string config_json;          // echo of the fitting configuration
  std::string dataset_fingerprint;  // SHA-256 over sorted file hashes
};

/// Throws ArgumentError when component dimensions disagree.
void validate_bundle(const ModelBundle& bundle);

/// Applies mask -> standardizer -> PCA to one raw feature vector.
Vector reduce_features(const ModelBundle& bundle, const Vector& raw);
Matrix reduce_feature_rows(const ModelBundle& bundle, const Matrix& rows);

/// SPLM1 binary layout (little-endian):
///   magic "SPLM1", u32 version,
///   schema JSON blob, filter bank (seed, k_random, kernels, names),
///   mask bytes, standardizer, PCA, net layer dims + row-major f64 weights,
///   f64 threshold, metadata JSON {config, dataset_fingerprint}.
std::vector<std::uint8_t> serialize_model(const ModelBundle& bundle);
ModelBundle deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace splicedet
