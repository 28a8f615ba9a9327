#pragma once

#include "splicedet/types.hpp"

#include <vector>

namespace splicedet {

/// Orthonormal 8x8 DCT-II basis matrix C: coefficients = C * block * C^T.
/// This scaling coincides with the JPEG reference FDCT, so standard
/// quantization tables apply to these coefficients directly.
const Matrix8& dct8_matrix();

inline Matrix8 dct2_block(const Matrix8& block) {
  const Matrix8& c = dct8_matrix();
  return c * block * c.transpose();
}

inline Matrix8 idct2_block(const Matrix8& coeffs) {
  const Matrix8& c = dct8_matrix();
  return c.transpose() * coeffs * c;
}

/// Edge-replicates the bottom/right borders until both dims are multiples of 8.
Array2D pad_to_block_multiple(const Array2D& plane);

/// Per-block coefficients of the edge-padded plane, blocks in row-major order.
struct BlockDct {
  int block_rows = 0;  // vertical block count
  int block_cols = 0;
  std::vector<Matrix8> blocks;

  const Matrix8& block(int by, int bx) const { return blocks[std::size_t(by) * block_cols + bx]; }
};

/// Forward block DCT; requires plane dims >= 8.
BlockDct block_dct(const Array2D& plane);

/// Inverse of block_dct, cropped back to the requested size.
Array2D block_idct(const BlockDct& coeffs, int height, int width);

}  // namespace splicedet
