#include "splicedet/spatial_features.hpp"

#include <array>
#include <cmath>

namespace splicedet {

namespace {

/// Circular neighbor offsets for P=8, R=1, clockwise from the top-left.
constexpr int kNbrDy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
constexpr int kNbrDx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};

int circular_transitions(unsigned code) {
  int t = 0;
  for (int i = 0; i < 8; ++i) {
    unsigned a = (code >> i) & 1u;
    unsigned b = (code >> ((i + 1) % 8)) & 1u;
    t += int(a != b);
  }
  return t;
}

/// code -> bin: uniform patterns in ascending code order take bins 0..57,
/// everything else maps to bin 58.
const std::array<int, 256>& lbp_bin_table() {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    int next = 0;
    for (unsigned code = 0; code < 256; ++code)
      t[code] = circular_transitions(code) <= 2 ? next++ : -1;
    for (unsigned code = 0; code < 256; ++code)
      if (t[code] < 0) t[code] = 58;
    return t;
  }();
  return table;
}

struct SobelField {
  Array2D gx, gy, mag;  // interior-sized: (H-2) x (W-2)
};

SobelField sobel_interior(const Array2D& gray) {
  const int h = int(gray.rows()), w = int(gray.cols());
  SobelField f;
  f.gx.resize(h - 2, w - 2);
  f.gy.resize(h - 2, w - 2);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      // Differences first so flat regions cancel exactly.
      double gx = (gray(y - 1, x + 1) - gray(y - 1, x - 1)) +
                  2 * (gray(y, x + 1) - gray(y, x - 1)) +
                  (gray(y + 1, x + 1) - gray(y + 1, x - 1));
      double gy = (gray(y + 1, x - 1) - gray(y - 1, x - 1)) +
                  2 * (gray(y + 1, x) - gray(y - 1, x)) +
                  (gray(y + 1, x + 1) - gray(y - 1, x + 1));
      f.gx(y - 1, x - 1) = gx;
      f.gy(y - 1, x - 1) = gy;
    }
  }
  f.mag = (f.gx.square() + f.gy.square()).sqrt();
  return f;
}

void require_min_size(const Array2D& gray, int min_dim, const char* op) {
  if (gray.rows() < min_dim || gray.cols() < min_dim)
    throw ArgumentError(std::string(op) + ": input too small");
}

}  // namespace

Vector lbp_histogram(const Array2D& gray) {
  require_min_size(gray, 3, "lbp_histogram");
  const auto& bins = lbp_bin_table();
  Vector hist = Vector::Zero(59);
  const int h = int(gray.rows()), w = int(gray.cols());
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double center = gray(y, x);
      unsigned code = 0;
      for (int i = 0; i < 8; ++i)
        if (gray(y + kNbrDy[i], x + kNbrDx[i]) >= center) code |= 1u << i;
      hist[bins[code]] += 1.0;
    }
  }
  double total = hist.sum();
  if (total > 0) hist /= total;
  return hist;
}

Vector edge_and_gradient_stats(const Array2D& gray) {
  require_min_size(gray, 3, "edge_and_gradient_stats");
  SobelField f = sobel_interior(gray);
  const double n = double(f.mag.size());
  Vector out = Vector::Zero(6);

  const double max_mag = f.mag.maxCoeff();
  if (max_mag <= 0.0) return out;  // flat patch: all six stay 0

  const double thr = 0.2 * max_mag;
  double edge_count = 0, edge_sum = 0, edge_sumsq = 0;
  for (Eigen::Index i = 0; i < f.mag.size(); ++i) {
    double m = f.mag(i);
    if (m > thr) {
      edge_count += 1;
      edge_sum += m;
      edge_sumsq += m * m;
    }
  }
  out[0] = edge_count / n;
  if (edge_count > 0) {
    double mean_e = edge_sum / edge_count;
    out[1] = mean_e;
    out[2] = std::sqrt(std::max(0.0, edge_sumsq / edge_count - mean_e * mean_e));
  }

  const double mean_all = f.mag.sum() / n;
  out[3] = mean_all;
  out[4] = std::sqrt((f.mag - mean_all).square().sum() / n);

  // Magnitude-weighted orientation histogram, 8 equal bins over [-pi, pi).
  double bins[8] = {0};
  for (Eigen::Index i = 0; i < f.mag.size(); ++i) {
    double m = f.mag(i);
    if (m <= 0) continue;
    double theta = std::atan2(f.gy(i), f.gx(i));
    int b = int((theta + M_PI) / (M_PI / 4.0));
    if (b > 7) b = 7;  // theta == pi edge
    if (b < 0) b = 0;
    bins[b] += m;
  }
  double wsum = 0;
  for (double b : bins) wsum += b;
  double entropy = 0;
  if (wsum > 0) {
    for (double b : bins) {
      if (b > 0) {
        double p = b / wsum;
        entropy -= p * std::log(p);
      }
    }
  }
  out[5] = entropy;
  return out;
}

Eigen::Vector3d color_correlations(const ImageBuffer& img) {
  if (img.channels == 1) return Eigen::Vector3d::Zero();
  if (img.channels != 3)
    throw ArgumentError("color_correlations: channels must be 1 or 3");
  const std::size_t n = img.pixel_count();
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) mean[c] += img.data[i * 3 + c];
  mean /= double(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d d{img.data[i * 3] - mean[0], img.data[i * 3 + 1] - mean[1],
                      img.data[i * 3 + 2] - mean[2]};
    cov += d * d.transpose();
  }
  cov /= double(n);
  auto corr = [&](int a, int b) {
    double va = cov(a, a), vb = cov(b, b);
    if (va <= 1e-24 || vb <= 1e-24) return 0.0;
    return cov(a, b) / std::sqrt(va * vb);
  };
  return {corr(0, 1), corr(0, 2), corr(1, 2)};
}

double noise_variance_estimate(const Array2D& gray) {
  require_min_size(gray, 3, "noise_variance_estimate");
  const int h = int(gray.rows()), w = int(gray.cols());
  double acc = 0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      double r = gray(y - 1, x - 1) - 2 * gray(y - 1, x) + gray(y - 1, x + 1) -
                 2 * gray(y, x - 1) + 4 * gray(y, x) - 2 * gray(y, x + 1) +
                 gray(y + 1, x - 1) - 2 * gray(y + 1, x) + gray(y + 1, x + 1);
      acc += std::abs(r);
    }
  }
  return std::sqrt(M_PI / 2.0) * acc / (6.0 * (w - 2) * (h - 2));
}

Eigen::Vector3d block_variance_stats(const Array2D& gray) {
  require_min_size(gray, 8, "block_variance_stats");
  const int by = int(gray.rows()) / 8, bx = int(gray.cols()) / 8;
  std::vector<double> vars;
  vars.reserve(std::size_t(by) * bx);
  for (int i = 0; i < by; ++i) {
    for (int j = 0; j < bx; ++j) {
      // Shift by one block entry first so constant blocks give variance 0
      // exactly instead of mean-rounding dust.
      Array2D b = gray.block(8 * i, 8 * j, 8, 8) - gray(8 * i, 8 * j);
      double mean = b.sum() / 64.0;
      vars.push_back((b - mean).square().sum() / 64.0);
    }
  }
  double mean = 0;
  for (double v : vars) mean += v;
  mean /= double(vars.size());
  double var = 0;
  for (double v : vars) var += (v - mean) * (v - mean);
  var /= double(vars.size());
  double sd = std::sqrt(var);
  return {mean, sd, mean > 0 ? sd / mean : 0.0};
}

Vector spatial_features(const ImageBuffer& patch_rgb) {
  const Array2D gray =
      patch_rgb.channels == 1 ? patch_rgb.plane() : to_grayscale(patch_rgb).plane();
  Vector out(kSpatialDim);
  out.segment(0, 59) = lbp_histogram(gray);
  out.segment(59, 6) = edge_and_gradient_stats(gray);
  out.segment(65, 3) = color_correlations(patch_rgb);
  out[68] = noise_variance_estimate(gray);
  out.segment(69, 3) = block_variance_stats(gray);
  return out;
}

}  // namespace splicedet
