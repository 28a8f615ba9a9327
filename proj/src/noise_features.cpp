#include "splicedet/noise_features.hpp"

#include "splicedet/rng.hpp"

#include <cmath>

namespace splicedet {

FilterBank init_filter_bank(int k_random, std::uint64_t seed) {
  if (k_random < 0) throw ArgumentError("init_filter_bank: k_random must be >= 0");
  FilterBank bank;
  bank.seed = seed;
  bank.k_random = k_random;

  Kernel3 laplacian, sobel_x;
  laplacian << 0, 1, 0, 1, -4, 1, 0, 1, 0;
  sobel_x << -1, 0, 1, -2, 0, 2, -1, 0, 1;
  bank.kernels = {laplacian, sobel_x, sobel_x.transpose()};
  bank.names = {"laplacian", "sobel_x", "sobel_y"};

  Rng rng(seed);
  for (int k = 0; k < k_random; ++k) {
    Kernel3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
    m.array() -= m.sum() / 9.0;
    m /= m.norm();
    bank.kernels.push_back(m);
    bank.names.push_back("rand" + std::to_string(k));
  }
  return bank;
}

namespace {

/// reflect-101 index: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

Array2D correlate_reflect(const Array2D& x, const Kernel3& k) {
  const int h = int(x.rows()), w = int(x.cols());
  Array2D out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      double acc = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += k(dy + 1, dx + 1) * x(reflect(y + dy, h), reflect(xx + dx, w));
      out(y, xx) = acc;
    }
  }
  return out;
}

}  // namespace

NoiseMaps apply_filters(const Array2D& gray, const FilterBank& bank) {
  if (gray.rows() < 3 || gray.cols() < 3)
    throw ArgumentError("apply_filters: input must be at least 3x3");
  NoiseMaps out;
  out.maps.reserve(bank.kernels.size());
  const double n = double(gray.size());
  for (const auto& k : bank.kernels) {
    Array2D r = correlate_reflect(gray, k);
    double mean = r.sum() / n;
    double var = (r - mean).square().sum() / n;
    out.maps.push_back(((r - mean) / (std::sqrt(var) + 1e-6)).tanh());
  }
  return out;
}

Eigen::Vector4d map_moments(const Array2D& map) {
  const double n = double(map.size());
  const double mean_abs = map.abs().sum() / n;
  const double mean = map.sum() / n;
  Array2D centered = map - mean;
  const double m2 = centered.square().sum() / n;
  const double sd = std::sqrt(m2);
  double skew = 0, kurt = 0;
  if (m2 > 1e-24) {
    const double m3 = centered.cube().sum() / n;
    const double m4 = centered.square().square().sum() / n;
    skew = m3 / (m2 * sd);
    kurt = m4 / (m2 * m2) - 3.0;
  }
  return {mean_abs, sd, skew, kurt};
}

Vector noise_statistics(const NoiseMaps& maps) {
  if (maps.maps.empty()) throw ArgumentError("noise_statistics: no maps");
  Vector out(4 * maps.maps.size());
  for (std::size_t i = 0; i < maps.maps.size(); ++i)
    out.segment<4>(Eigen::Index(4 * i)) = map_moments(maps.maps[i]);
  return out;
}

}  // namespace splicedet
