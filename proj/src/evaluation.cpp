#include "splicedet/evaluation.hpp"

#include "splicedet/freq_features.hpp"
#include "splicedet/image_io.hpp"
#include "splicedet/jpeg_codec.hpp"
#include "splicedet/spatial_features.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace splicedet {

using nlohmann::json;

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

// --------------------------------------------------------------- metrics --

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ArgumentError("compute_metrics: empty confusion matrix");
  Metrics m;
  m.accuracy = double(cm.tp + cm.tn) / double(cm.total());
  m.precision = (cm.tp + cm.fp) > 0 ? double(cm.tp) / double(cm.tp + cm.fp) : 0.0;
  m.recall = (cm.tp + cm.fn) > 0 ? double(cm.tp) / double(cm.tp + cm.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw ArgumentError("roc_auc: size mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_auc: both classes required");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied scores.
  double pos_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double midrank = 0.5 * double(i + 1 + j + 1);
    for (std::size_t t = i; t <= j; ++t)
      if (labels[order[t]] == 1) pos_rank_sum += midrank;
    i = j + 1;
  }
  return (pos_rank_sum - double(n_pos) * double(n_pos + 1) / 2.0) /
         (double(n_pos) * double(n_neg));
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) throw DataError("roc_points: both classes required");

  std::vector<double> uniq = scores;
  std::sort(uniq.begin(), uniq.end(), std::greater<>());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  std::vector<RocPoint> pts;
  pts.push_back({0.0, 0.0, uniq.front() + 1.0});
  for (double thr : uniq) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (scores[k] >= thr) (labels[k] == 1 ? tp : fp) += 1;
    }
    pts.push_back({double(fp) / double(n_neg), double(tp) / double(n_pos), thr});
  }
  return pts;
}

namespace {

double chi2_1_survival(double x) { return std::erfc(std::sqrt(x / 2.0)); }

double binomial_two_sided_p(long k_min, long n) {
  if (n == 0) return 1.0;
  // 2 * P(X <= k_min) for X ~ Binomial(n, 1/2), capped at 1.
  long double cdf = 0, coeff = 1;  // C(n, 0)
  for (long i = 0; i <= k_min; ++i) {
    cdf += coeff;
    coeff = coeff * (long double)(n - i) / (long double)(i + 1);
  }
  long double p = 2.0L * cdf * std::pow(0.5L, (long double)n);
  return double(p > 1.0L ? 1.0L : p);
}

}  // namespace

std::pair<double, double> mcnemar_test(const std::vector<int>& preds_a,
                                       const std::vector<int>& preds_b,
                                       const std::vector<int>& labels) {
  if (preds_a.size() != preds_b.size() || preds_a.size() != labels.size())
    throw ArgumentError("mcnemar_test: length mismatch");
  long b = 0, c = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool a_right = preds_a[i] == labels[i];
    bool b_right = preds_b[i] == labels[i];
    if (a_right && !b_right) ++b;
    if (!a_right && b_right) ++c;
  }
  if (b + c == 0) return {0.0, 1.0};
  if (b + c >= 25) {
    double stat = std::pow(std::abs(double(b - c)) - 1.0, 2) / double(b + c);
    return {stat, chi2_1_survival(stat)};
  }
  return {double(std::min(b, c)), binomial_two_sided_p(std::min(b, c), b + c)};
}

std::vector<int> stratified_group_kfold(const std::vector<int>& image_labels,
                                        const std::vector<std::string>& image_ids, int k,
                                        std::uint64_t seed) {
  if (image_labels.size() != image_ids.size())
    throw ArgumentError("stratified_group_kfold: size mismatch");
  if (k < 2) throw ArgumentError("stratified_group_kfold: k must be >= 2");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : image_labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos < std::size_t(k) || n_neg < std::size_t(k))
    throw DataError("stratified_group_kfold: need at least k images per class");

  // Deterministic base order, independent of caller ordering.
  std::vector<std::size_t> order(image_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return image_ids[a] < image_ids[b];
  });

  std::vector<int> fold(image_ids.size(), -1);
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t idx : order)
      if (image_labels[idx] == cls) members.push_back(idx);
    Rng rng(mix_seed(seed, 0xF01D + std::uint64_t(cls)));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.index(i)]);
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[members[i]] = int(i % std::size_t(k));
  }
  return fold;
}

// -------------------------------------------------------------- pipeline --

std::string pipeline_config_to_json(const PipelineConfig& config) {
  json groups = json::array();
  for (FeatureGroup g : config.groups) groups.push_back(to_string(g));
  json j{{"patch_size", config.patch_size},
         {"stride", config.stride},
         {"tamper_threshold", config.tamper_threshold},
         {"k_random", config.k_random},
         {"filter_seed", config.filter_seed},
         {"variance_fraction", config.variance_fraction},
         {"max_components", config.max_components},
         {"min_variance", config.min_variance},
         {"val_fraction", config.val_fraction},
         {"ela_quality", config.ela_quality},
         {"groups", groups},
         {"train",
          {{"learning_rate", config.train.learning_rate},
           {"beta1", config.train.beta1},
           {"beta2", config.train.beta2},
           {"epsilon", config.train.epsilon},
           {"batch_size", config.train.batch_size},
           {"max_epochs", config.train.max_epochs},
           {"patience", config.train.patience},
           {"pairs_per_epoch", config.train.pairs_per_epoch},
           {"margin", config.train.margin}}}};
  return j.dump();
}

namespace {

struct LoadedImage {
  ImageBuffer pixels;
  std::vector<Patch> patches;
};

LoadedImage load_and_label(const DatasetImage& img, const PipelineConfig& config) {
  LoadedImage out;
  out.pixels = load_image(img.path);
  out.patches = extract_patches(out.pixels, config.patch_size, config.stride, img.id);
  if (img.tampered) {
    if (img.mask_path.empty())
      throw DataError("tampered image '" + img.id +
                      "' has no ground-truth mask; patch-level training needs one at "
                      "masks/" +
                      img.id + ".png");
    GroundTruthMask mask = load_mask_png(img.mask_path);
    if (mask.width != out.pixels.width || mask.height != out.pixels.height)
      throw DataError("mask dimensions do not match image: " + img.id);
    label_patches(out.patches, mask, config.tamper_threshold);
  } else {
    for (auto& p : out.patches) {
      p.label = PatchLabel::authentic;
      p.tamper_fraction = 0.0;
    }
  }
  return out;
}

int label_code(PatchLabel l) {
  switch (l) {
    case PatchLabel::authentic: return 0;
    case PatchLabel::tampered: return 1;
    default: return -1;
  }
}

template <typename RowFn>
PatchTable build_table(const std::vector<DatasetImage>& images,
                       const PipelineConfig& config, int dim, RowFn&& row_fn) {
  if (images.empty()) throw DataError("dataset is empty");
  double t0 = now_ms();
  PatchTable table;
  table.bank = init_filter_bank(config.k_random, config.filter_seed);
  table.schema = default_schema(table.bank);
  table.fingerprint = dataset_fingerprint(images);

  std::vector<Matrix> rows_per_image(images.size());
  std::vector<std::vector<int>> labels_per_image(images.size());
  std::size_t n_rows = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    LoadedImage li = load_and_label(images[i], config);
    rows_per_image[i] = row_fn(li);
    labels_per_image[i].reserve(li.patches.size());
    for (const auto& p : li.patches) labels_per_image[i].push_back(label_code(p.label));
    n_rows += li.patches.size();
    table.image_ids.push_back(images[i].id);
    table.image_labels.push_back(images[i].tampered ? 1 : 0);
  }

  table.features.resize(Eigen::Index(n_rows), dim);
  table.patch_image.reserve(n_rows);
  table.patch_labels.reserve(n_rows);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    table.features.middleRows(row, rows_per_image[i].rows()) = rows_per_image[i];
    row += rows_per_image[i].rows();
    for (int l : labels_per_image[i]) {
      table.patch_image.push_back(int(i));
      table.patch_labels.push_back(l);
    }
  }
  table.build_ms = now_ms() - t0;
  return table;
}

}  // namespace

PatchTable build_patch_table(const std::vector<DatasetImage>& images,
                             const PipelineConfig& config) {
  FilterBank bank = init_filter_bank(config.k_random, config.filter_seed);
  const int dim = 4 * bank.size() + kSpatialDim + kFrequencyDim;
  return build_table(images, config, dim, [&](const LoadedImage& li) {
    return extract_feature_rows(li.patches, bank, config.threads);
  });
}

PatchTable build_ela_table(const std::vector<DatasetImage>& images,
                           const PipelineConfig& config) {
  int channels = 0;
  auto row_fn = [&](const LoadedImage& li) {
    if (channels == 0) channels = li.pixels.channels;
    if (channels != li.pixels.channels)
      throw DataError("ELA baseline requires a uniform channel count across the dataset");
    ImageBuffer rt = jpeg_roundtrip(li.pixels, config.ela_quality);
    Matrix rows(Eigen::Index(li.patches.size()), 3 * channels);
    for (std::size_t pi = 0; pi < li.patches.size(); ++pi) {
      const Patch& p = li.patches[pi];
      for (int c = 0; c < channels; ++c) {
        std::vector<double> vals;
        vals.reserve(std::size_t(p.size) * p.size);
        for (int y = 0; y < p.size; ++y)
          for (int x = 0; x < p.size; ++x)
            vals.push_back(std::abs(li.pixels.at(p.y0 + y, p.x0 + x, c) -
                                    rt.at(p.y0 + y, p.x0 + x, c)));
        double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / double(vals.size());
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= double(vals.size());
        rows(Eigen::Index(pi), 3 * c) = mean;
        rows(Eigen::Index(pi), 3 * c + 1) = std::sqrt(var);
        rows(Eigen::Index(pi), 3 * c + 2) = percentile(vals, 0.95);
      }
    }
    return rows;
  };
  // Probe the first image for the channel count so the table width is known.
  ImageBuffer first = load_image(images.at(0).path);
  channels = first.channels;
  return build_table(images, config, 3 * channels, row_fn);
}

namespace {

struct SplitIndices {
  std::vector<int> train_images, val_images;
};

/// Seeded stratified split of the non-test images into train and validation.
SplitIndices split_train_val(const PatchTable& table, const std::vector<int>& fold_of_image,
                             int test_fold, double val_fraction, std::uint64_t seed) {
  SplitIndices split;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> members;
    for (std::size_t i = 0; i < table.image_ids.size(); ++i)
      if (fold_of_image[i] != test_fold && table.image_labels[i] == cls)
        members.push_back(int(i));
    if (members.empty()) continue;
    Rng rng(mix_seed(seed, 0x5D117 + std::uint64_t(cls)));
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.index(i)]);
    std::size_t n_val = std::size_t(std::lround(val_fraction * double(members.size())));
    n_val = std::max<std::size_t>(1, n_val);
    n_val = std::min(n_val, members.size() - 1);
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_val ? split.val_images : split.train_images).push_back(members[i]);
  }
  std::sort(split.train_images.begin(), split.train_images.end());
  std::sort(split.val_images.begin(), split.val_images.end());
  return split;
}

std::vector<Eigen::Index> labeled_rows_of_images(const PatchTable& table,
                                                 const std::vector<int>& image_set) {
  std::vector<char> in_set(table.image_ids.size(), 0);
  for (int i : image_set) in_set[std::size_t(i)] = 1;
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < table.patch_image.size(); ++r)
    if (in_set[std::size_t(table.patch_image[r])] && table.patch_labels[r] >= 0)
      rows.push_back(Eigen::Index(r));
  return rows;
}

std::vector<Eigen::Index> all_rows_of_image(const PatchTable& table, int image) {
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < table.patch_image.size(); ++r)
    if (table.patch_image[r] == image) rows.push_back(Eigen::Index(r));
  return rows;
}

Matrix gather_rows(const Matrix& src, const std::vector<Eigen::Index>& rows) {
  Matrix out(Eigen::Index(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = src.row(rows[i]);
  return out;
}

}  // namespace

ModelBundle fit_fold(const PatchTable& table, const std::vector<int>& fold_of_image,
                     int test_fold, const PipelineConfig& config, std::uint64_t seed) {
  SplitIndices split =
      split_train_val(table, fold_of_image, test_fold, config.val_fraction, seed);
  if (split.train_images.empty() || split.val_images.empty())
    throw DataError("fit_fold: empty train or validation image set");

  const auto train_rows_idx = labeled_rows_of_images(table, split.train_images);
  Matrix train_raw = gather_rows(table.features, train_rows_idx);
  if (train_raw.rows() < 2) throw DataError("fit_fold: not enough labeled patches");

  ModelBundle bundle;
  bundle.schema = table.schema;
  bundle.bank = table.bank;
  bundle.dataset_fingerprint = table.fingerprint;
  bundle.config_json = pipeline_config_to_json(config);

  Mask variance_mask = select_features(train_raw, config.min_variance);
  bundle.mask = combine_masks(variance_mask, ablation_mask(table.schema, config.groups));
  if (mask_popcount(bundle.mask) == 0)
    throw DataError("fit_fold: every feature was masked out");

  Matrix train_masked = apply_mask_rows(bundle.mask, train_raw);
  bundle.stats = fit_standardizer(train_masked);
  Matrix train_std = apply_standardizer(bundle.stats, train_masked);
  bundle.pca = fit_pca(train_std, config.variance_fraction, config.max_components);

  Matrix train_reduced = apply_pca_rows(bundle.pca, train_std).transpose();  // d x n
  std::vector<int> train_labels;
  train_labels.reserve(train_rows_idx.size());
  for (Eigen::Index r : train_rows_idx)
    train_labels.push_back(table.patch_labels[std::size_t(r)]);

  const auto val_rows_idx = labeled_rows_of_images(table, split.val_images);
  Matrix val_raw = gather_rows(table.features, val_rows_idx);
  Matrix val_reduced =
      apply_pca_rows(bundle.pca, apply_standardizer(bundle.stats,
                                                    apply_mask_rows(bundle.mask, val_raw)))
          .transpose();
  std::vector<int> val_labels;
  val_labels.reserve(val_rows_idx.size());
  for (Eigen::Index r : val_rows_idx) val_labels.push_back(table.patch_labels[std::size_t(r)]);

  TrainConfig tc = config.train;
  tc.seed = mix_seed(seed, 0x7E7);
  const std::uint64_t pair_seed = mix_seed(seed, 0x9A12);
  const std::uint64_t val_pair_seed = mix_seed(seed, 0x9A13);
  const int n_pairs = tc.pairs_per_epoch;
  PairSource train_source = [&, pair_seed, n_pairs](std::uint64_t epoch) {
    Rng rng(mix_seed(pair_seed, epoch));
    return sample_pairs(train_reduced, train_labels, n_pairs, rng);
  };
  PairSource val_source = [&, val_pair_seed, n_pairs](std::uint64_t) {
    Rng rng(val_pair_seed);
    return sample_pairs(val_reduced, val_labels, n_pairs, rng);
  };

  auto [net, history] = train(train_source, val_source, bundle.pca.output_dim(), tc);
  bundle.net = std::move(net);

  // Threshold from validation image scores, never from the test fold.
  std::vector<double> val_scores;
  std::vector<int> val_image_labels;
  const std::uint64_t score_seed = mix_seed(seed, 0x5C03E);
  for (int img : split.val_images) {
    auto rows = all_rows_of_image(table, img);
    Matrix cols = reduce_feature_rows(bundle, gather_rows(table.features, rows)).transpose();
    Rng rng(mix_seed(score_seed, std::uint64_t(img)));
    val_scores.push_back(image_score(bundle.net, cols, rng));
    val_image_labels.push_back(table.image_labels[std::size_t(img)]);
  }
  bundle.threshold = calibrate_threshold(val_scores, val_image_labels);
  return bundle;
}

double score_table_image(const PatchTable& table, int image_index,
                         const ModelBundle& bundle, std::uint64_t seed) {
  auto rows = all_rows_of_image(table, image_index);
  Matrix cols = reduce_feature_rows(bundle, gather_rows(table.features, rows)).transpose();
  Rng rng(mix_seed(seed, std::uint64_t(image_index)));
  return image_score(bundle.net, cols, rng);
}

ImageScoreResult score_single_image(const ImageBuffer& img, const ModelBundle& bundle,
                                    int patch_size, int stride, std::uint64_t seed) {
  ImageScoreResult result;
  result.patches = extract_patches(img, patch_size, stride);
  Matrix raw(Eigen::Index(result.patches.size()), bundle.schema.total_dim());
  for (std::size_t i = 0; i < result.patches.size(); ++i)
    raw.row(Eigen::Index(i)) =
        extract_features(result.patches[i].pixels, bundle.bank).transpose();
  Matrix cols = reduce_feature_rows(bundle, raw).transpose();
  Rng rng(seed);
  result.score = image_score(bundle.net, cols, rng);

  Matrix emb = embed_batch(bundle.net, cols);
  const Eigen::Index n = emb.cols();
  result.patch_scores.assign(std::size_t(n), 0.0);
  if (n >= 2) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) acc += (emb.col(i) - emb.col(j)).norm();
      result.patch_scores[std::size_t(i)] = acc / double(n - 1);
    }
  }
  return result;
}

// --------------------------------------------------------------- reports --

double EvalReport::mean_auc() const {
  double s = 0;
  for (const auto& f : folds) s += f.auc;
  return folds.empty() ? 0.0 : s / double(folds.size());
}

double EvalReport::mean_accuracy() const {
  double s = 0;
  for (const auto& f : folds) s += f.metrics.accuracy;
  return folds.empty() ? 0.0 : s / double(folds.size());
}

EvalReport run_cv_on_table(const PatchTable& table, const PipelineConfig& config,
                           const std::vector<int>& fold_of_image, int k,
                           std::uint64_t seed) {
  EvalReport report;
  report.config_json = pipeline_config_to_json(config);
  report.seed = seed;
  report.k = k;
  report.dataset_fingerprint = table.fingerprint;
  report.method = "siamese";
  report.features_ms = table.build_ms;

  for (int fold = 0; fold < k; ++fold) {
    FoldResult fr;
    double t0 = now_ms();
    ModelBundle bundle =
        fit_fold(table, fold_of_image, fold, config, mix_seed(seed, std::uint64_t(fold)));
    double t1 = now_ms();
    fr.tau = bundle.threshold;

    const std::uint64_t score_seed = mix_seed(seed, 0x7E57);
    for (std::size_t i = 0; i < table.image_ids.size(); ++i) {
      if (fold_of_image[i] != fold) continue;
      double score = score_table_image(table, int(i), bundle, score_seed);
      fr.test_ids.push_back(table.image_ids[i]);
      fr.test_scores.push_back(score);
      fr.test_labels.push_back(table.image_labels[i]);
      int pred = score >= bundle.threshold ? 1 : 0;
      fr.test_preds.push_back(pred);
      if (pred == 1)
        (table.image_labels[i] == 1 ? fr.cm.tp : fr.cm.fp) += 1;
      else
        (table.image_labels[i] == 1 ? fr.cm.fn : fr.cm.tn) += 1;
    }
    double t2 = now_ms();
    fr.metrics = compute_metrics(fr.cm);
    fr.auc = roc_auc(fr.test_scores, fr.test_labels);
    fr.timings.fit_ms = t1 - t0;
    fr.timings.eval_ms = t2 - t1;
    report.folds.push_back(std::move(fr));
  }
  return report;
}

EvalReport run_cv(const std::vector<DatasetImage>& images, const PipelineConfig& config,
                  int k, std::uint64_t seed) {
  PatchTable table = build_patch_table(images, config);
  auto folds = stratified_group_kfold(table.image_labels, table.image_ids, k, seed);
  return run_cv_on_table(table, config, folds, k, seed);
}

std::vector<std::pair<std::string, EvalReport>> run_ablation(
    const std::vector<DatasetImage>& images, const PipelineConfig& config, int k,
    std::uint64_t seed) {
  PatchTable table = build_patch_table(images, config);
  auto folds = stratified_group_kfold(table.image_labels, table.image_ids, k, seed);

  const std::vector<std::pair<std::string, std::set<FeatureGroup>>> rows = {
      {"all", {FeatureGroup::noise, FeatureGroup::spatial, FeatureGroup::frequency}},
      {"spatial", {FeatureGroup::spatial}},
      {"frequency", {FeatureGroup::frequency}},
      {"noise", {FeatureGroup::noise}},
      {"spatial+frequency", {FeatureGroup::spatial, FeatureGroup::frequency}},
  };

  std::vector<std::pair<std::string, EvalReport>> out;
  for (const auto& [name, groups] : rows) {
    PipelineConfig row_config = config;
    row_config.groups = groups;
    out.emplace_back(name, run_cv_on_table(table, row_config, folds, k, seed));
  }
  return out;
}

// ------------------------------------------------- logistic regression ----

namespace {

double softplus_neg(double t) {
  // log(1 + exp(-t)) computed stably.
  return t > 0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

}  // namespace

LogisticModel fit_logistic(const Matrix& rows, const std::vector<int>& labels,
                           double lambda, int iterations) {
  if (rows.rows() < 2) throw ArgumentError("fit_logistic: need at least 2 rows");
  if (std::size_t(rows.rows()) != labels.size())
    throw ArgumentError("fit_logistic: labels mismatch");

  LogisticModel model;
  model.stats = fit_standardizer(rows);
  Matrix x = apply_standardizer(model.stats, rows);
  const Eigen::Index n = x.rows(), d = x.cols();

  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[std::size_t(i)] == 1 ? 1.0 : -1.0;

  // Smoothness bound: 0.25 * trace(X^T X + 1)/n + lambda >= max eigenvalue of
  // the Hessian, so step 1/L keeps descent monotone.
  double trace = x.array().square().sum() + double(n);
  double lipschitz = 0.25 * trace / double(n) + lambda;
  double step = 1.0 / lipschitz;

  Vector w = Vector::Zero(d + 1);  // last entry is the bias
  auto loss_of = [&](const Vector& wv) {
    Vector z = x * wv.head(d) + Vector::Constant(n, wv[d]);
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) loss += softplus_neg(y[i] * z[i]);
    loss /= double(n);
    loss += 0.5 * lambda * wv.head(d).squaredNorm();
    return loss;
  };

  model.loss_trace.push_back(loss_of(w));
  for (int it = 0; it < iterations; ++it) {
    Vector z = x * w.head(d) + Vector::Constant(n, w[d]);
    Vector g = Vector::Zero(d + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = -y[i] / (1.0 + std::exp(y[i] * z[i]));  // d/dz softplus(-yz) * y'
      g.head(d) += s * x.row(i).transpose();
      g[d] += s;
    }
    g /= double(n);
    g.head(d) += lambda * w.head(d);
    w -= step * g;
    model.loss_trace.push_back(loss_of(w));
  }
  model.weights = w;
  return model;
}

double logistic_prob(const LogisticModel& model, const Vector& x) {
  Vector xs = apply_standardizer(model.stats, x);
  const Eigen::Index d = model.weights.size() - 1;
  double z = model.weights.head(d).dot(xs) + model.weights[d];
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

/// Shared CV protocol for the two logistic baselines.
EvalReport run_logistic_cv(const PatchTable& table, const PipelineConfig& config,
                           const std::vector<int>& fold_of_image, int k,
                           std::uint64_t seed, const std::string& method) {
  EvalReport report;
  report.config_json = pipeline_config_to_json(config);
  report.seed = seed;
  report.k = k;
  report.dataset_fingerprint = table.fingerprint;
  report.method = method;
  report.features_ms = table.build_ms;

  for (int fold = 0; fold < k; ++fold) {
    FoldResult fr;
    double t0 = now_ms();
    std::uint64_t fold_seed = mix_seed(seed, std::uint64_t(fold));
    SplitIndices split =
        split_train_val(table, fold_of_image, fold, config.val_fraction, fold_seed);

    auto train_rows_idx = labeled_rows_of_images(table, split.train_images);
    Matrix train_rows = gather_rows(table.features, train_rows_idx);
    std::vector<int> train_labels;
    for (Eigen::Index r : train_rows_idx)
      train_labels.push_back(table.patch_labels[std::size_t(r)]);
    LogisticModel lr = fit_logistic(train_rows, train_labels);

    auto image_prob = [&](int img) {
      auto rows = all_rows_of_image(table, img);
      double acc = 0;
      for (Eigen::Index r : rows)
        acc += logistic_prob(lr, table.features.row(r).transpose());
      return acc / double(rows.size());
    };

    std::vector<double> val_scores;
    std::vector<int> val_labels;
    for (int img : split.val_images) {
      val_scores.push_back(image_prob(img));
      val_labels.push_back(table.image_labels[std::size_t(img)]);
    }
    fr.tau = calibrate_threshold(val_scores, val_labels);
    double t1 = now_ms();

    for (std::size_t i = 0; i < table.image_ids.size(); ++i) {
      if (fold_of_image[i] != fold) continue;
      double score = image_prob(int(i));
      fr.test_ids.push_back(table.image_ids[i]);
      fr.test_scores.push_back(score);
      fr.test_labels.push_back(table.image_labels[i]);
      int pred = score >= fr.tau ? 1 : 0;
      fr.test_preds.push_back(pred);
      if (pred == 1)
        (table.image_labels[i] == 1 ? fr.cm.tp : fr.cm.fp) += 1;
      else
        (table.image_labels[i] == 1 ? fr.cm.fn : fr.cm.tn) += 1;
    }
    double t2 = now_ms();
    fr.metrics = compute_metrics(fr.cm);
    fr.auc = roc_auc(fr.test_scores, fr.test_labels);
    fr.timings.fit_ms = t1 - t0;
    fr.timings.eval_ms = t2 - t1;
    report.folds.push_back(std::move(fr));
  }
  return report;
}

}  // namespace

EvalReport baseline_ela(const std::vector<DatasetImage>& images,
                        const PipelineConfig& config, int k, std::uint64_t seed) {
  PatchTable table = build_ela_table(images, config);
  auto folds = stratified_group_kfold(table.image_labels, table.image_ids, k, seed);
  return run_logistic_cv(table, config, folds, k, seed, "ela");
}

EvalReport baseline_statistical(const std::vector<DatasetImage>& images,
                                const PipelineConfig& config, int k, std::uint64_t seed) {
  PatchTable table = build_patch_table(images, config);
  // Keep only the spatial slice of the fused features.
  int offset = table.schema.group_offset(FeatureGroup::spatial);
  int dim = table.schema.group_dim(FeatureGroup::spatial);
  table.features = table.features.middleCols(offset, dim).eval();
  auto folds = stratified_group_kfold(table.image_labels, table.image_ids, k, seed);
  return run_logistic_cv(table, config, folds, k, seed, "statistical");
}

ModelBundle train_model(const std::vector<DatasetImage>& images,
                        const PipelineConfig& config, std::uint64_t seed) {
  PatchTable table = build_patch_table(images, config);
  // No test fold: every image is train or validation material.
  std::vector<int> no_test_fold(table.image_ids.size(), 0);
  return fit_fold(table, no_test_fold, /*test_fold=*/-1, config, seed);
}

// ----------------------------------------------------------------- json ---

namespace {

json fold_to_json(const FoldResult& fr, int index) {
  return json{{"fold", index},
              {"accuracy", fr.metrics.accuracy},
              {"precision", fr.metrics.precision},
              {"recall", fr.metrics.recall},
              {"f1", fr.metrics.f1},
              {"auc", fr.auc},
              {"tau", fr.tau},
              {"confusion",
               {{"tp", fr.cm.tp}, {"fp", fr.cm.fp}, {"fn", fr.cm.fn}, {"tn", fr.cm.tn}}}};
}

void mean_std(const std::vector<double>& v, double* mean, double* sd) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double var = 0;
  for (double x : v) var += (x - m) * (x - m);
  *mean = m;
  *sd = std::sqrt(var / double(v.size()));
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json j;
  j["config"] = json::parse(report.config_json);
  j["seed"] = report.seed;
  j["k"] = report.k;
  j["method"] = report.method;
  j["dataset_fingerprint"] = report.dataset_fingerprint;

  j["folds"] = json::array();
  std::vector<double> acc, prec, rec, f1, auc;
  std::vector<double> all_scores;
  std::vector<int> all_labels;
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& fr = report.folds[i];
    j["folds"].push_back(fold_to_json(fr, int(i)));
    acc.push_back(fr.metrics.accuracy);
    prec.push_back(fr.metrics.precision);
    rec.push_back(fr.metrics.recall);
    f1.push_back(fr.metrics.f1);
    auc.push_back(fr.auc);
    all_scores.insert(all_scores.end(), fr.test_scores.begin(), fr.test_scores.end());
    all_labels.insert(all_labels.end(), fr.test_labels.begin(), fr.test_labels.end());
  }

  json agg;
  const char* names[5] = {"accuracy", "precision", "recall", "f1", "auc"};
  const std::vector<double>* vals[5] = {&acc, &prec, &rec, &f1, &auc};
  for (int i = 0; i < 5; ++i) {
    double m, s;
    mean_std(*vals[i], &m, &s);
    agg[std::string(names[i]) + "_mean"] = m;
    agg[std::string(names[i]) + "_std"] = s;
  }
  j["aggregate"] = agg;

  j["roc"] = json::array();
  for (const auto& pt : roc_points(all_scores, all_labels))
    j["roc"].push_back({{"fpr", pt.fpr}, {"tpr", pt.tpr}, {"thr", pt.thr}});

  return j.dump(2);
}

std::string timings_to_json(const EvalReport& report) {
  json j;
  j["features_ms"] = report.features_ms;
  j["folds"] = json::array();
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& t = report.folds[i].timings;
    j["folds"].push_back(
        {{"fold", int(i)}, {"fit_ms", t.fit_ms}, {"eval_ms", t.eval_ms}});
  }
  return j.dump(2);
}

}  // namespace splicedet
