#include "splicedet/dct.hpp"

#include <cmath>

namespace splicedet {

const Matrix8& dct8_matrix() {
  static const Matrix8 c = [] {
    Matrix8 m;
    for (int k = 0; k < 8; ++k) {
      double s = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        m(k, n) = s * std::cos(M_PI * (2 * n + 1) * k / 16.0);
    }
    return m;
  }();
  return c;
}

Array2D pad_to_block_multiple(const Array2D& plane) {
  const int h = int(plane.rows()), w = int(plane.cols());
  const int ph = (h + 7) / 8 * 8, pw = (w + 7) / 8 * 8;
  if (ph == h && pw == w) return plane;
  Array2D out(ph, pw);
  for (int y = 0; y < ph; ++y) {
    int sy = y < h ? y : h - 1;
    for (int x = 0; x < pw; ++x) out(y, x) = plane(sy, x < w ? x : w - 1);
  }
  return out;
}

BlockDct block_dct(const Array2D& plane) {
  if (plane.rows() < 8 || plane.cols() < 8)
    throw ArgumentError("block_dct: input must be at least 8x8");
  Array2D padded = pad_to_block_multiple(plane);
  BlockDct out;
  out.block_rows = int(padded.rows()) / 8;
  out.block_cols = int(padded.cols()) / 8;
  out.blocks.resize(std::size_t(out.block_rows) * out.block_cols);
  for (int by = 0; by < out.block_rows; ++by) {
    for (int bx = 0; bx < out.block_cols; ++bx) {
      Matrix8 block = padded.block(8 * by, 8 * bx, 8, 8).matrix();
      out.blocks[std::size_t(by) * out.block_cols + bx] = dct2_block(block);
    }
  }
  return out;
}

Array2D block_idct(const BlockDct& coeffs, int height, int width) {
  Array2D padded(coeffs.block_rows * 8, coeffs.block_cols * 8);
  for (int by = 0; by < coeffs.block_rows; ++by)
    for (int bx = 0; bx < coeffs.block_cols; ++bx)
      padded.block(8 * by, 8 * bx, 8, 8) = idct2_block(coeffs.block(by, bx)).array();
  return padded.topLeftCorner(height, width);
}

}  // namespace splicedet
