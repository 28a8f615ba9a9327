#pragma once

#include "splicedet/rng.hpp"
#include "splicedet/types.hpp"

#include <functional>
#include <vector>

namespace splicedet {

/// Shared-weight embedding branch: d_in -> 128 -> 96 -> 64, ReLU hidden
/// layers, identity output. One parameter set applied to both pair members.
struct EmbeddingNet {
  std::vector<Matrix> weights;  // weights[l]: dims[l+1] x dims[l]
  std::vector<Vector> biases;

  int input_dim() const { return weights.empty() ? 0 : int(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : int(weights.back().rows()); }
  std::vector<int> layer_dims() const;
};

inline constexpr int kEmbeddingDim = 64;

/// He-normal weights (std sqrt(2/fan_in)), zero biases, deterministic seed.
EmbeddingNet init_net(int d_in, std::uint64_t seed);

Vector embed(const EmbeddingNet& net, const Vector& x);
/// Columns are samples.
Matrix embed_batch(const EmbeddingNet& net, const Matrix& cols);

double pair_distance(const Vector& a, const Vector& b);

struct ContrastiveParams {
  double margin = 1.0;
};

/// L = y*D^2 + (1-y)*max(0, m-D)^2 with y=1 for similar pairs.
double contrastive_loss(const Vector& ea, const Vector& eb, int y,
                        const ContrastiveParams& params);

/// y = 1: similar (authentic, authentic); y = 0: dissimilar (authentic,
/// tampered). Vectors are the reduced (post-PCA) features.
struct PairSample {
  Vector a, b;
  int y = 0;
};

struct NetGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Mean batch loss and its gradient for every parameter. Contributions from
/// both branches accumulate into the shared weights; the D=0 dissimilar case
/// uses subgradient 0.
std::pair<double, NetGradients> loss_gradients(const EmbeddingNet& net,
                                               const std::vector<PairSample>& batch,
                                               const ContrastiveParams& params);

/// Mean batch loss only (validation).
double batch_loss(const EmbeddingNet& net, const std::vector<PairSample>& batch,
                  const ContrastiveParams& params);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 10;        // epochs without val improvement > 1e-5
  int pairs_per_epoch = 2048;
  double margin = 1.0;
  std::uint64_t seed = 0;
};

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step = 0;
};

AdamState make_adam_state(const EmbeddingNet& net);
void adam_step(EmbeddingNet& net, const NetGradients& grads, AdamState& state,
               const TrainConfig& config);

/// Balanced pair sampling: half similar (two distinct authentic patches),
/// half dissimilar (one authentic, one tampered). labels[i] is 1 for
/// tampered. Tampered-tampered pairs are never produced.
std::vector<PairSample> sample_pairs(const Matrix& feature_cols,
                                     const std::vector<int>& labels, int n, Rng& rng);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = 0;  // 1-based; 0 if training never ran
};

/// Produces the pair set for one epoch; called with the epoch index so each
/// epoch sees fresh pairs deterministically.
using PairSource = std::function<std::vector<PairSample>(std::uint64_t epoch)>;

/// Adam training with early stopping on a fixed validation pair set
/// (val_source(0)). Returns the best-validation parameters, not the last.
std::pair<EmbeddingNet, TrainHistory> train(const PairSource& train_source,
                                            const PairSource& val_source, int d_in,
                                            const TrainConfig& config);

/// 95th percentile (linear interpolation) of pairwise embedding distances
/// between the image's patches. All pairs when there are at most
/// max_sampled_pairs of them, otherwise a seeded sample. Patch columns are
/// canonicalized by sorting, so the score does not depend on patch order.
double image_score(const EmbeddingNet& net, const Matrix& patch_feature_cols, Rng& rng,
                   int max_sampled_pairs = 2000);

/// Max-F1 threshold over midpoints of consecutive sorted scores (tampered =
/// positive, predicted at score >= tau); F1 ties resolve toward higher recall.
double calibrate_threshold(const std::vector<double>& scores,
                           const std::vector<int>& labels);

/// p-th percentile with linear interpolation, p in [0,1].
double percentile(std::vector<double> values, double p);

}  // namespace splicedet
