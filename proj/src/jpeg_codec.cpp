#include "splicedet/jpeg_codec.hpp"

#include "splicedet/dct.hpp"

#include <cmath>

namespace splicedet {

const std::array<int, 64>& jpeg_base_quant_table() {
  static const std::array<int, 64> table = {
      16, 11, 10, 16, 24,  40,  51,  61,   //
      12, 12, 14, 19, 26,  58,  60,  55,   //
      14, 13, 16, 24, 40,  57,  69,  56,   //
      14, 17, 22, 29, 51,  87,  80,  62,   //
      18, 22, 37, 56, 68,  109, 103, 77,   //
      24, 35, 55, 64, 81,  104, 113, 92,   //
      49, 64, 78, 87, 103, 121, 120, 101,  //
      72, 92, 95, 98, 112, 100, 103, 99};
  return table;
}

Matrix8 jpeg_quant_table(int quality) {
  if (quality < 1 || quality > 100)
    throw ArgumentError("jpeg quality must be in [1,100]");
  const long scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  const auto& base = jpeg_base_quant_table();
  Matrix8 q;
  for (int i = 0; i < 64; ++i) {
    long v = (base[std::size_t(i)] * scale + 50) / 100;
    q(i / 8, i % 8) = double(v < 1 ? 1 : v);
  }
  return q;
}

ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality) {
  const Matrix8 q = jpeg_quant_table(quality);
  ImageBuffer out = img;
  for (int c = 0; c < img.channels; ++c) {
    Array2D plane = img.channel(c) * 255.0 - 128.0;
    BlockDct coeffs = block_dct(plane);
    for (auto& b : coeffs.blocks)
      b = (b.array() / q.array()).round() * q.array();
    Array2D rec = block_idct(coeffs, img.height, img.width);
    out.set_channel(c, ((rec + 128.0) / 255.0).min(1.0).max(0.0));
  }
  return out;
}

}  // namespace splicedet
