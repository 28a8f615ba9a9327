#pragma once

#include "splicedet/image.hpp"
#include "splicedet/types.hpp"

#include <string>
#include <vector>

namespace splicedet {

using Kernel3 = Eigen::Matrix3d;

/// High-pass residual filter bank: Laplacian, Sobel X, Sobel Y, then k_random
/// zero-sum unit-Frobenius-norm kernels drawn from a seeded normal. Fixed
/// after initialization; seed and kernels travel inside the model bundle.
struct FilterBank {
  std::vector<Kernel3> kernels;
  std::vector<std::string> names;
  std::uint64_t seed = 0;
  int k_random = 0;

  int size() const { return int(kernels.size()); }
};

FilterBank init_filter_bank(int k_random = 5, std::uint64_t seed = 0);

/// Residual maps: same-size correlation with reflect-101 padding, per-map
/// instance normalization (x-mean)/(std+1e-6), then tanh. Values in (-1,1).
struct NoiseMaps {
  std::vector<Array2D> maps;
};

NoiseMaps apply_filters(const Array2D& gray, const FilterBank& bank);

/// Per map: mean |x|, std, skewness, excess kurtosis (zero-variance maps
/// report 0 skew/kurtosis). Length 4*K, ordered by kernel.
Vector noise_statistics(const NoiseMaps& maps);

/// The four pooled moments of one map, in feature order.
Eigen::Vector4d map_moments(const Array2D& map);

}  // namespace splicedet
