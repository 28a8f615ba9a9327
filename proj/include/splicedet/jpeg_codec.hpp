#pragma once

#include "splicedet/image.hpp"
#include "splicedet/types.hpp"

#include <array>

namespace splicedet {

/// Annex K luminance base table, row-major.
const std::array<int, 64>& jpeg_base_quant_table();

/// Quality-scaled table: S = quality<50 ? 5000/quality : 200-2*quality,
/// entry = max(1, floor((base*S + 50)/100)). Quality must be in [1,100].
Matrix8 jpeg_quant_table(int quality);

/// JPEG quantization round trip without entropy coding (which is lossless and
/// cannot change pixels). Per channel: scale to 255*v - 128, edge-pad to 8x8
/// blocks, orthonormal block DCT, divide/round/multiply by the quality-scaled
/// luminance table, inverse DCT, shift back, clamp to [0,1].
ImageBuffer jpeg_roundtrip(const ImageBuffer& img, int quality);

}  // namespace splicedet
