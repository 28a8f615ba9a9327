#include "splicedet/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace splicedet {

const char* to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::noise: return "noise";
    case FeatureGroup::spatial: return "spatial";
    default: return "frequency";
  }
}

FeatureGroup feature_group_from_string(const std::string& s) {
  if (s == "noise") return FeatureGroup::noise;
  if (s == "spatial") return FeatureGroup::spatial;
  if (s == "frequency") return FeatureGroup::frequency;
  throw FormatError("unknown feature group: " + s);
}

int FeatureSchema::group_dim(FeatureGroup g) const {
  int n = 0;
  for (const auto& e : entries) n += (e.group == g);
  return n;
}

int FeatureSchema::group_offset(FeatureGroup g) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].group == g) return int(i);
  return -1;
}

Vector concat_features(const Vector& noise, const Vector& spatial,
                       const Vector& frequency, const FeatureSchema& schema) {
  if (noise.size() != schema.group_dim(FeatureGroup::noise) ||
      spatial.size() != schema.group_dim(FeatureGroup::spatial) ||
      frequency.size() != schema.group_dim(FeatureGroup::frequency))
    throw SchemaError("concat_features: sub-vector length mismatch with schema");
  Vector out(schema.total_dim());
  out << noise, spatial, frequency;
  return out;
}

StandardizationStats fit_standardizer(const Matrix& rows) {
  if (rows.rows() < 2) throw ArgumentError("fit_standardizer: need at least 2 rows");
  StandardizationStats s;
  s.mean = rows.colwise().mean();
  Matrix centered = rows.rowwise() - s.mean.transpose();
  s.std = (centered.array().square().colwise().sum() / double(rows.rows())).sqrt();
  for (Eigen::Index i = 0; i < s.std.size(); ++i)
    if (s.std[i] < 1e-8) s.std[i] = 1.0;
  return s;
}

Vector apply_standardizer(const StandardizationStats& stats, const Vector& x) {
  if (x.size() != stats.mean.size())
    throw ArgumentError("apply_standardizer: dimension mismatch");
  return (x - stats.mean).cwiseQuotient(stats.std);
}

Matrix apply_standardizer(const StandardizationStats& stats, const Matrix& rows) {
  if (rows.cols() != stats.mean.size())
    throw ArgumentError("apply_standardizer: dimension mismatch");
  return (rows.rowwise() - stats.mean.transpose()).array().rowwise() /
         stats.std.transpose().array();
}

Mask select_features(const Matrix& rows, double min_variance) {
  if (rows.rows() < 2) throw ArgumentError("select_features: need at least 2 rows");
  Vector mean = rows.colwise().mean();
  Vector var = (rows.rowwise() - mean.transpose()).array().square().colwise().sum() /
               double(rows.rows());
  Mask mask(std::size_t(rows.cols()));
  for (Eigen::Index i = 0; i < var.size(); ++i) mask[std::size_t(i)] = var[i] >= min_variance;
  return mask;
}

Vector apply_mask(const Mask& mask, const Vector& x) {
  if (std::size_t(x.size()) != mask.size())
    throw ArgumentError("apply_mask: dimension mismatch");
  Vector out(Eigen::Index(mask_popcount(mask)));
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out[j++] = x[Eigen::Index(i)];
  return out;
}

Matrix apply_mask_rows(const Mask& mask, const Matrix& rows) {
  if (std::size_t(rows.cols()) != mask.size())
    throw ArgumentError("apply_mask_rows: dimension mismatch");
  Matrix out(rows.rows(), Eigen::Index(mask_popcount(mask)));
  Eigen::Index j = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.col(j++) = rows.col(Eigen::Index(i));
  return out;
}

Mask combine_masks(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw ArgumentError("combine_masks: size mismatch");
  Mask out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

PcaModel fit_pca(const Matrix& rows, double variance_fraction, int max_components) {
  if (rows.rows() < 2) throw ArgumentError("fit_pca: need at least 2 rows");
  if (variance_fraction <= 0.0 || variance_fraction > 1.0)
    throw ArgumentError("fit_pca: variance_fraction must be in (0,1]");

  const Eigen::Index d = rows.cols();
  PcaModel model;
  model.variance_fraction = variance_fraction;
  model.mean = rows.colwise().mean();
  Matrix centered = rows.rowwise() - model.mean.transpose();
  Matrix cov = centered.transpose() * centered / double(rows.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw TrainingError("fit_pca: eigensolver failed");
  // Eigen returns ascending order; flip to descending.
  Vector evals = solver.eigenvalues().reverse();
  Matrix evecs = solver.eigenvectors().rowwise().reverse();

  double total = 0;
  for (Eigen::Index i = 0; i < d; ++i) total += std::max(0.0, evals[i]);

  const double rank_tol = std::max(evals.size() > 0 ? evals[0] : 0.0, 0.0) * 1e-12;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (evals[i] > rank_tol && evals[i] > 0) ++rank;
  if (rank == 0) rank = 1;

  Eigen::Index d_out = 1;
  if (total > 0) {
    double acc = 0;
    for (d_out = 0; d_out < d; ++d_out) {
      acc += std::max(0.0, evals[d_out]);
      if (acc / total >= variance_fraction - 1e-15) {
        ++d_out;
        break;
      }
    }
    if (d_out == 0) d_out = 1;
  }
  d_out = std::min({d_out, Eigen::Index(max_components), rank});
  if (d_out < 1) d_out = 1;

  model.components = evecs.leftCols(d_out).transpose();
  model.explained_variance = evals.head(d_out).cwiseMax(0.0);

  // Sign convention: largest-magnitude entry of each component is positive.
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    Eigen::Index arg = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (model.components(r, arg) < 0) model.components.row(r) *= -1.0;
  }
  return model;
}

Vector apply_pca(const PcaModel& model, const Vector& x) {
  if (x.size() != model.mean.size()) throw ArgumentError("apply_pca: dimension mismatch");
  return model.components * (x - model.mean);
}

Matrix apply_pca_rows(const PcaModel& model, const Matrix& rows) {
  if (rows.cols() != model.mean.size())
    throw ArgumentError("apply_pca_rows: dimension mismatch");
  // Row-by-row through the vector path: batched gemm may round differently,
  // and saved-model application must reproduce training rows bit-identically.
  Matrix out(rows.rows(), model.output_dim());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = (model.components * (rows.row(i).transpose() - model.mean)).transpose();
  return out;
}

Mask ablation_mask(const FeatureSchema& schema, const std::set<FeatureGroup>& enabled) {
  if (enabled.empty()) throw ArgumentError("ablation_mask: no groups enabled");
  Mask mask(std::size_t(schema.total_dim()));
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = enabled.count(schema.entries[i].group) > 0;
  return mask;
}

}  // namespace splicedet
