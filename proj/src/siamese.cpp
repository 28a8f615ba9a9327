#include "splicedet/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace splicedet {

std::vector<int> EmbeddingNet::layer_dims() const {
  std::vector<int> dims;
  if (weights.empty()) return dims;
  dims.push_back(int(weights.front().cols()));
  for (const auto& w : weights) dims.push_back(int(w.rows()));
  return dims;
}

EmbeddingNet init_net(int d_in, std::uint64_t seed) {
  if (d_in < 1) throw ArgumentError("init_net: d_in must be >= 1");
  const int dims[4] = {d_in, 128, 96, kEmbeddingDim};
  EmbeddingNet net;
  Rng rng(seed);
  for (int l = 0; l < 3; ++l) {
    const double sd = std::sqrt(2.0 / dims[l]);
    Matrix w(dims[l + 1], dims[l]);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = sd * rng.normal();
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(dims[l + 1]));
  }
  return net;
}

namespace {

struct ForwardTrace {
  std::vector<Matrix> z;  // pre-activations per layer
  std::vector<Matrix> a;  // inputs per layer (a[0] = x)
};

Matrix forward(const EmbeddingNet& net, const Matrix& x, ForwardTrace* trace) {
  Matrix cur = x;
  if (trace) trace->a.push_back(cur);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    Matrix z = (net.weights[l] * cur).colwise() + net.biases[l];
    if (trace) trace->z.push_back(z);
    cur = l + 1 < net.weights.size() ? z.cwiseMax(0.0) : z;
    if (trace && l + 1 < net.weights.size()) trace->a.push_back(cur);
  }
  return cur;
}

/// Accumulates one branch's backward pass into grads. dE is dL/d(output).
void backward(const EmbeddingNet& net, const ForwardTrace& trace, const Matrix& dE,
              NetGradients& grads) {
  Matrix delta = dE;
  for (int l = int(net.weights.size()) - 1; l >= 0; --l) {
    grads.weights[std::size_t(l)] += delta * trace.a[std::size_t(l)].transpose();
    grads.biases[std::size_t(l)] += delta.rowwise().sum();
    if (l > 0) {
      delta = net.weights[std::size_t(l)].transpose() * delta;
      delta = delta.cwiseProduct(
          (trace.z[std::size_t(l - 1)].array() > 0.0).cast<double>().matrix());
    }
  }
}

NetGradients zero_gradients(const EmbeddingNet& net) {
  NetGradients g;
  for (const auto& w : net.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : net.biases) g.biases.push_back(Vector::Zero(b.size()));
  return g;
}

}  // namespace

Vector embed(const EmbeddingNet& net, const Vector& x) {
  if (x.size() != net.input_dim()) throw ArgumentError("embed: dimension mismatch");
  return forward(net, x, nullptr);
}

Matrix embed_batch(const EmbeddingNet& net, const Matrix& cols) {
  if (cols.rows() != net.input_dim())
    throw ArgumentError("embed_batch: dimension mismatch");
  return forward(net, cols, nullptr);
}

double pair_distance(const Vector& a, const Vector& b) { return (a - b).norm(); }

double contrastive_loss(const Vector& ea, const Vector& eb, int y,
                        const ContrastiveParams& params) {
  const double d = pair_distance(ea, eb);
  if (y == 1) return d * d;
  const double slack = std::max(0.0, params.margin - d);
  return slack * slack;
}

std::pair<double, NetGradients> loss_gradients(const EmbeddingNet& net,
                                               const std::vector<PairSample>& batch,
                                               const ContrastiveParams& params) {
  if (batch.empty()) throw ArgumentError("loss_gradients: empty batch");
  const Eigen::Index n = Eigen::Index(batch.size());
  const Eigen::Index d = net.input_dim();

  Matrix xa(d, n), xb(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xa.col(i) = batch[std::size_t(i)].a;
    xb.col(i) = batch[std::size_t(i)].b;
  }

  ForwardTrace ta, tb;
  Matrix ea = forward(net, xa, &ta);
  Matrix eb = forward(net, xb, &tb);
  Matrix diff = ea - eb;

  double loss = 0;
  Matrix dEa = Matrix::Zero(ea.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dist = diff.col(i).norm();
    if (batch[std::size_t(i)].y == 1) {
      loss += dist * dist;
      dEa.col(i) = 2.0 * diff.col(i);
    } else {
      const double slack = params.margin - dist;
      if (slack > 0.0) {
        loss += slack * slack;
        // d/dD (m-D)^2 = -2(m-D); dD/dEa = diff/D. Subgradient 0 at D = 0.
        if (dist > 0.0) dEa.col(i) = (-2.0 * slack / dist) * diff.col(i);
      }
    }
  }
  loss /= double(n);
  dEa /= double(n);

  NetGradients grads = zero_gradients(net);
  backward(net, ta, dEa, grads);
  backward(net, tb, -dEa, grads);
  return {loss, std::move(grads)};
}

double batch_loss(const EmbeddingNet& net, const std::vector<PairSample>& batch,
                  const ContrastiveParams& params) {
  if (batch.empty()) throw ArgumentError("batch_loss: empty batch");
  const Eigen::Index n = Eigen::Index(batch.size());
  Matrix xa(net.input_dim(), n), xb(net.input_dim(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xa.col(i) = batch[std::size_t(i)].a;
    xb.col(i) = batch[std::size_t(i)].b;
  }
  Matrix diff = forward(net, xa, nullptr) - forward(net, xb, nullptr);
  double loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double dist = diff.col(i).norm();
    if (batch[std::size_t(i)].y == 1) {
      loss += dist * dist;
    } else {
      double slack = std::max(0.0, params.margin - dist);
      loss += slack * slack;
    }
  }
  return loss / double(n);
}

AdamState make_adam_state(const EmbeddingNet& net) {
  AdamState s;
  for (const auto& w : net.weights) {
    s.mw.push_back(Matrix::Zero(w.rows(), w.cols()));
    s.vw.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : net.biases) {
    s.mb.push_back(Vector::Zero(b.size()));
    s.vb.push_back(Vector::Zero(b.size()));
  }
  return s;
}

void adam_step(EmbeddingNet& net, const NetGradients& grads, AdamState& state,
               const TrainConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, double(state.step));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.mw[l] = config.beta1 * state.mw[l] + (1 - config.beta1) * grads.weights[l];
    state.vw[l] = config.beta2 * state.vw[l].array().matrix() +
                  (1 - config.beta2) * grads.weights[l].array().square().matrix();
    net.weights[l].array() -= config.learning_rate * (state.mw[l].array() / bc1) /
                              ((state.vw[l].array() / bc2).sqrt() + config.epsilon);

    state.mb[l] = config.beta1 * state.mb[l] + (1 - config.beta1) * grads.biases[l];
    state.vb[l] = config.beta2 * state.vb[l].array().matrix() +
                  (1 - config.beta2) * grads.biases[l].array().square().matrix();
    net.biases[l].array() -= config.learning_rate * (state.mb[l].array() / bc1) /
                             ((state.vb[l].array() / bc2).sqrt() + config.epsilon);
  }
}

std::vector<PairSample> sample_pairs(const Matrix& feature_cols,
                                     const std::vector<int>& labels, int n, Rng& rng) {
  if (std::size_t(feature_cols.cols()) != labels.size())
    throw ArgumentError("sample_pairs: labels/features mismatch");
  std::vector<Eigen::Index> authentic, tampered;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == 1 ? tampered : authentic).push_back(Eigen::Index(i));
  if (authentic.size() < 2 || tampered.empty())
    throw DataError("sample_pairs: need >= 2 authentic and >= 1 tampered patches");

  std::vector<PairSample> pairs;
  pairs.reserve(std::size_t(n));
  const int n_similar = n / 2;
  for (int i = 0; i < n; ++i) {
    PairSample p;
    if (i < n_similar) {
      std::size_t a = rng.index(authentic.size());
      std::size_t b = rng.index(authentic.size() - 1);
      if (b >= a) ++b;  // distinct patches
      p.a = feature_cols.col(authentic[a]);
      p.b = feature_cols.col(authentic[b]);
      p.y = 1;
    } else {
      p.a = feature_cols.col(authentic[rng.index(authentic.size())]);
      p.b = feature_cols.col(tampered[rng.index(tampered.size())]);
      p.y = 0;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::pair<EmbeddingNet, TrainHistory> train(const PairSource& train_source,
                                            const PairSource& val_source, int d_in,
                                            const TrainConfig& config) {
  EmbeddingNet net = init_net(d_in, config.seed);
  AdamState state = make_adam_state(net);
  ContrastiveParams params{config.margin};

  const std::vector<PairSample> val_pairs = val_source(0);
  TrainHistory history;
  EmbeddingNet best = net;
  double best_val = std::numeric_limits<double>::infinity();
  int since_improve = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<PairSample> pairs = train_source(std::uint64_t(epoch));
    double loss_sum = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < pairs.size();
         start += std::size_t(config.batch_size)) {
      std::size_t end = std::min(pairs.size(), start + std::size_t(config.batch_size));
      std::vector<PairSample> batch(pairs.begin() + long(start), pairs.begin() + long(end));
      auto [loss, grads] = loss_gradients(net, batch, params);
      adam_step(net, grads, state, config);
      loss_sum += loss * double(end - start);
      seen += end - start;
    }
    const double train_loss = seen ? loss_sum / double(seen) : 0.0;
    const double val_loss = batch_loss(net, val_pairs, params);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
      throw TrainingError("training diverged at epoch " + std::to_string(epoch));
    history.train_loss.push_back(train_loss);
    history.val_loss.push_back(val_loss);

    if (val_loss < best_val - 1e-5) {
      best_val = val_loss;
      best = net;
      history.best_epoch = epoch;
      since_improve = 0;
    } else {
      ++since_improve;
      if (since_improve >= config.patience) break;
    }
  }
  return {std::move(best), std::move(history)};
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile: empty input");
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  double rank = p * double(values.size() - 1);
  std::size_t lo = std::size_t(rank);
  if (lo + 1 >= values.size()) return values.back();
  double frac = rank - double(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double image_score(const EmbeddingNet& net, const Matrix& patch_feature_cols, Rng& rng,
                   int max_sampled_pairs) {
  const Eigen::Index n = patch_feature_cols.cols();
  if (n < 2) throw DataError("image_score: need at least 2 patches");

  // Canonical patch order (lexicographic by feature vector) makes the seeded
  // sampling independent of caller ordering.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n), 0);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    for (Eigen::Index r = 0; r < patch_feature_cols.rows(); ++r) {
      double a = patch_feature_cols(r, i), b = patch_feature_cols(r, j);
      if (a != b) return a < b;
    }
    return false;
  });
  Matrix sorted(patch_feature_cols.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) sorted.col(i) = patch_feature_cols.col(order[std::size_t(i)]);

  Matrix emb = embed_batch(net, sorted);
  const std::size_t total_pairs = std::size_t(n) * std::size_t(n - 1) / 2;
  std::vector<double> dists;
  if (total_pairs <= std::size_t(max_sampled_pairs)) {
    dists.reserve(total_pairs);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back((emb.col(i) - emb.col(j)).norm());
  } else {
    dists.reserve(std::size_t(max_sampled_pairs));
    for (int k = 0; k < max_sampled_pairs; ++k) {
      Eigen::Index i = Eigen::Index(rng.index(std::size_t(n)));
      Eigen::Index j = Eigen::Index(rng.index(std::size_t(n - 1)));
      if (j >= i) ++j;
      dists.push_back((emb.col(i) - emb.col(j)).norm());
    }
  }
  return percentile(std::move(dists), 0.95);
}

double calibrate_threshold(const std::vector<double>& scores,
                           const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw ArgumentError("calibrate_threshold: size mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw DataError("calibrate_threshold: both classes required");

  std::vector<double> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<double> candidates;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  if (candidates.empty()) candidates.push_back(sorted.front());

  auto f1_recall = [&](double tau) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      bool pred = scores[i] >= tau;
      if (labels[i] == 1) {
        pred ? ++tp : ++fn;
      } else if (pred) {
        ++fp;
      }
    }
    double f1 = (2 * tp + fp + fn) > 0 ? 2.0 * tp / double(2 * tp + fp + fn) : 0.0;
    double recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
    return std::make_pair(f1, recall);
  };

  double best_tau = candidates.front();
  auto [best_f1, best_recall] = f1_recall(best_tau);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    auto [f1, recall] = f1_recall(candidates[i]);
    if (f1 > best_f1 || (f1 == best_f1 && recall > best_recall)) {
      best_f1 = f1;
      best_recall = recall;
      best_tau = candidates[i];
    }
  }
  return best_tau;
}

}  // namespace splicedet
