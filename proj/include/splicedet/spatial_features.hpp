#pragma once

#include "splicedet/image.hpp"
#include "splicedet/types.hpp"

namespace splicedet {

/// Uniform LBP histogram (P=8, R=1, neighbor >= center sets the bit).
/// 58 uniform patterns get their own bins in ascending code order; all
/// non-uniform codes share bin 58. Borders excluded, normalized by count.
Vector lbp_histogram(const Array2D& gray);

/// Sobel-based statistics over the interior, 6 values:
///   edge density (magnitude > 0.2*max), mean and std of magnitude over edge
///   pixels, then mean and std of magnitude over all interior pixels and the
///   entropy (nats) of the magnitude-weighted 8-bin orientation histogram.
Vector edge_and_gradient_stats(const Array2D& gray);

/// Pearson correlations (RG, RB, GB); zero-variance channels give 0, and
/// single-channel input gives (0,0,0).
Eigen::Vector3d color_correlations(const ImageBuffer& img);

/// Immerkaer fast noise estimate:
/// sigma = sqrt(pi/2) * sum|L*x| / (6*(W-2)*(H-2)).
double noise_variance_estimate(const Array2D& gray);

/// Mean, std, and coefficient of variation of per-8x8-block variances
/// (non-overlapping blocks, partial edge blocks ignored).
Eigen::Vector3d block_variance_stats(const Array2D& gray);

/// Full 72-dim spatial sub-vector in schema order:
/// 59 lbp + 3 edge + 3 gradient + 3 color + 1 noise sigma + 3 block variance.
Vector spatial_features(const ImageBuffer& patch_rgb);

inline constexpr int kSpatialDim = 72;

}  // namespace splicedet
