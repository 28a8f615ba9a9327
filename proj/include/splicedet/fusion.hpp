#pragma once

#include "splicedet/types.hpp"

#include <set>
#include <string>
#include <vector>

namespace splicedet {

enum class FeatureGroup { noise, spatial, frequency };

const char* to_string(FeatureGroup g);
FeatureGroup feature_group_from_string(const std::string& s);

/// Ordered, named layout of the fused vector. Groups always appear in the
/// order noise, spatial, frequency.
struct FeatureSchema {
  struct Entry {
    std::string name;
    FeatureGroup group;
  };
  std::vector<Entry> entries;

  int total_dim() const { return int(entries.size()); }
  int group_dim(FeatureGroup g) const;
  /// Index of the first entry of a group; -1 when the group is absent.
  int group_offset(FeatureGroup g) const;
};

/// Concatenates the three sub-vectors in schema order, validating lengths.
Vector concat_features(const Vector& noise, const Vector& spatial,
                       const Vector& frequency, const FeatureSchema& schema);

struct StandardizationStats {
  Vector mean;
  Vector std;  // floored to 1 where the feature variance vanishes
};

/// Per-column mean and (population) std over training rows; std below 1e-8
/// is floored to 1 so constant features pass through as zeros.
StandardizationStats fit_standardizer(const Matrix& rows);
Vector apply_standardizer(const StandardizationStats& stats, const Vector& x);
Matrix apply_standardizer(const StandardizationStats& stats, const Matrix& rows);

/// Keep-mask over raw features: false where the training variance is below
/// min_variance. Applied before standardization and PCA.
Mask select_features(const Matrix& rows, double min_variance = 1e-8);

Vector apply_mask(const Mask& mask, const Vector& x);
Matrix apply_mask_rows(const Mask& mask, const Matrix& rows);
Mask combine_masks(const Mask& a, const Mask& b);

struct PcaModel {
  Vector mean;                // d_in
  Matrix components;          // d_out x d_in, orthonormal rows
  Vector explained_variance;  // descending
  double variance_fraction = 0.0;

  int input_dim() const { return int(components.cols()); }
  int output_dim() const { return int(components.rows()); }
};

/// PCA by eigen-decomposition of the sample covariance (divisor n-1). Keeps
/// the smallest component count reaching variance_fraction, capped at
/// max_components and at the rank. Sign convention: the entry of largest
/// magnitude in each component is positive.
PcaModel fit_pca(const Matrix& standardized_rows, double variance_fraction = 0.95,
                 int max_components = 64);
Vector apply_pca(const PcaModel& model, const Vector& x);
Matrix apply_pca_rows(const PcaModel& model, const Matrix& rows);

/// True exactly where the entry's group is enabled.
Mask ablation_mask(const FeatureSchema& schema, const std::set<FeatureGroup>& enabled);

}  // namespace splicedet
