#pragma once

#include "splicedet/dct.hpp"
#include "splicedet/image.hpp"
#include "splicedet/types.hpp"

#include <array>

namespace splicedet {

/// Zig-zag scan position of each (u,v) coefficient, row-major 8x8.
const std::array<int, 64>& zigzag_index_table();

/// Energy split over zig-zag bands plus pooled AC moments, 6 values:
/// DC fraction, low (1-9), mid (10-35), high (36-63) energy fractions,
/// then std and excess kurtosis of all AC coefficients pooled. Zero-energy
/// input reports (1,0,0,0,0,0).
Vector dct_statistics(const BlockDct& coeffs);

/// Mean absolute neighbor difference across 8-aligned block boundaries divided
/// by the same mean over all other neighbor pairs; 1.0 if the denominator
/// vanishes. Rows and columns pooled. Requires H,W >= 17.
double blockiness(const Array2D& gray);

/// Hann-windowed FFT peak analysis, 2 values: peak-to-median magnitude ratio
/// over bins with radius >= 2 (capped at 1e6; 1.0 when the spectrum is empty)
/// and the peak radius normalized by min(H,W).
Eigen::Vector2d fft_periodicity(const Array2D& gray);

/// Orthonormal Haar detail statistics, 12 values: per level (1,2), per band
/// (LH, HL, HH), mean |coefficient| then std. LH carries variation along x,
/// HL along y. Odd dimensions are truncated by one before each level.
Vector wavelet_features(const Array2D& gray, int levels = 2);

/// Radially averaged periodogram features, 4 values: log-log slope over
/// radii [2, rmax) and energy fractions of the three radial thirds of
/// [1, rmax), rmax = min(H,W)/2.
Vector psd_features(const Array2D& gray);

/// Full 25-dim frequency sub-vector in schema order:
/// 6 dct + 1 blockiness + 2 periodicity + 12 wavelet + 4 psd.
Vector frequency_features(const Array2D& gray);

inline constexpr int kFrequencyDim = 25;

}  // namespace splicedet
