#pragma once

#include "splicedet/dataset.hpp"
#include "splicedet/features.hpp"
#include "splicedet/model_bundle.hpp"
#include "splicedet/siamese.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace splicedet {

// ------------------------------------------------------------- metrics ----

struct ConfusionMatrix {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long total() const { return tp + fp + fn + tn; }
};

struct Metrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
};

/// Standard definitions, tampered = positive; zero-denominator precision,
/// recall, and F1 report 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

/// Mann-Whitney AUC with midranks for ties. labels: 1 = tampered.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct RocPoint {
  double fpr = 0, tpr = 0, thr = 0;
};
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

/// McNemar: chi-squared with continuity correction when b+c >= 25, exact
/// two-sided binomial otherwise. Returns (statistic, p). preds/labels are 0/1.
std::pair<double, double> mcnemar_test(const std::vector<int>& preds_a,
                                       const std::vector<int>& preds_b,
                                       const std::vector<int>& labels);

/// Image-grouped stratified k-fold: per-class counts deviate by at most one
/// image per fold; all patches of an image share its fold. Returns the fold
/// of each image.
std::vector<int> stratified_group_kfold(const std::vector<int>& image_labels,
                                        const std::vector<std::string>& image_ids, int k,
                                        std::uint64_t seed);

// ------------------------------------------------------------ pipeline ----

struct PipelineConfig {
  int patch_size = 64;
  int stride = 32;
  double tamper_threshold = 0.10;
  int k_random = 5;
  std::uint64_t filter_seed = 7;
  double variance_fraction = 0.95;
  int max_components = 64;
  double min_variance = 1e-8;
  TrainConfig train;
  std::set<FeatureGroup> groups = {FeatureGroup::noise, FeatureGroup::spatial,
                                   FeatureGroup::frequency};
  double val_fraction = 0.10;
  int threads = 1;
  int ela_quality = 90;
};

std::string pipeline_config_to_json(const PipelineConfig& config);

/// All patches of a dataset with raw feature rows; pixels are not retained.
struct PatchTable {
  FeatureSchema schema;
  FilterBank bank;
  std::vector<std::string> image_ids;
  std::vector<int> image_labels;  // 1 = tampered
  Matrix features;                // n_patches x d
  std::vector<int> patch_image;   // row -> image index
  std::vector<int> patch_labels;  // 0 authentic, 1 tampered, -1 unlabeled
  std::string fingerprint;
  /// Per-image "id:hash" lines; fit_fold fingerprints only the train+val
  /// subset so a fitted bundle never depends on test-fold bytes.
  std::vector<std::string> image_hash_lines;
  double build_ms = 0;
};

/// Loads every image, extracts and labels patches, computes fused features.
/// Tampered images without masks raise DataError (patch-level training needs
/// them; point masks/<stem>.png at the ground truth).
PatchTable build_patch_table(const std::vector<DatasetImage>& images,
                             const PipelineConfig& config);

/// Same table shape with per-patch ELA residual statistics as features
/// (mean, std, p95 of |img - jpeg_roundtrip(img, quality)| per channel).
PatchTable build_ela_table(const std::vector<DatasetImage>& images,
                           const PipelineConfig& config);

/// Fits the full pipeline with only the train+validation images of the given
/// fold assignment (test_fold images are never touched): variance selection,
/// standardizer, PCA, embedding net, and the validation-calibrated threshold.
ModelBundle fit_fold(const PatchTable& table, const std::vector<int>& fold_of_image,
                     int test_fold, const PipelineConfig& config, std::uint64_t seed);

/// Scores one image of the table with a fitted bundle.
double score_table_image(const PatchTable& table, int image_index,
                         const ModelBundle& bundle, std::uint64_t seed);

/// Standalone scoring for the CLI: extracts patches, reduces them with the
/// bundle, and reports the image score plus a per-patch anomaly value (mean
/// embedding distance to the image's other patches) for heatmap rendering.
struct ImageScoreResult {
  double score = 0;
  std::vector<Patch> patches;
  std::vector<double> patch_scores;
};
ImageScoreResult score_single_image(const ImageBuffer& img, const ModelBundle& bundle,
                                    int patch_size, int stride, std::uint64_t seed);

// ------------------------------------------------------------- reports ----

struct FoldTimings {
  double fit_ms = 0;   // selection + standardizer + PCA + training + calibration
  double eval_ms = 0;  // test-fold scoring
};

struct FoldResult {
  Metrics metrics;
  double auc = 0;
  ConfusionMatrix cm;
  double tau = 0;
  FoldTimings timings;
  std::vector<std::string> test_ids;
  std::vector<double> test_scores;
  std::vector<int> test_labels;
  std::vector<int> test_preds;
};

struct EvalReport {
  std::string config_json;
  std::uint64_t seed = 0;
  int k = 0;
  std::string dataset_fingerprint;
  std::string method;  // "siamese", "ela", "statistical"
  std::vector<FoldResult> folds;
  double features_ms = 0;

  double mean_auc() const;
  double mean_accuracy() const;
};

/// Full cross-validated evaluation of the proposed pipeline.
EvalReport run_cv(const std::vector<DatasetImage>& images, const PipelineConfig& config,
                  int k, std::uint64_t seed);

/// run_cv on a prebuilt table with a fixed fold assignment (shared across
/// ablation rows).
EvalReport run_cv_on_table(const PatchTable& table, const PipelineConfig& config,
                           const std::vector<int>& fold_of_image, int k,
                           std::uint64_t seed);

/// One CV run per feature-group subset, identical folds across rows. Keys:
/// "all", "spatial", "frequency", "noise", "spatial+frequency".
std::vector<std::pair<std::string, EvalReport>> run_ablation(
    const std::vector<DatasetImage>& images, const PipelineConfig& config, int k,
    std::uint64_t seed);

/// ELA residual features + logistic regression, same CV protocol.
EvalReport baseline_ela(const std::vector<DatasetImage>& images,
                        const PipelineConfig& config, int k, std::uint64_t seed);

/// Spatial statistical features + logistic regression, same CV protocol.
EvalReport baseline_statistical(const std::vector<DatasetImage>& images,
                                const PipelineConfig& config, int k, std::uint64_t seed);

/// Fits one bundle on the whole dataset (internal validation split for early
/// stopping and threshold calibration). Backs the `train` subcommand.
ModelBundle train_model(const std::vector<DatasetImage>& images,
                        const PipelineConfig& config, std::uint64_t seed);

/// report.json payload. Wall-clock timings are deliberately excluded so the
/// file is byte-identical across same-seed runs; emit_timings_json carries
/// the measurements instead.
std::string report_to_json(const EvalReport& report);
std::string timings_to_json(const EvalReport& report);

// --------------------------------------------- logistic regression -------

struct LogisticModel {
  StandardizationStats stats;
  Vector weights;  // includes bias as last entry
  std::vector<double> loss_trace;
};

/// Gradient descent on L2-regularized logistic loss with a Lipschitz-safe
/// fixed step, so the loss trace is monotone non-increasing.
LogisticModel fit_logistic(const Matrix& rows, const std::vector<int>& labels,
                           double lambda = 1e-3, int iterations = 500);
double logistic_prob(const LogisticModel& model, const Vector& x);

}  // namespace splicedet
