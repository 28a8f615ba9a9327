#pragma once

#include "splicedet/image.hpp"

#include <filesystem>

namespace splicedet {

/// Loads PNG, baseline JPEG, or binary PPM (P6), dispatching on the file's
/// magic bytes. 8-bit samples map to v/255, 16-bit to v/65535.
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (grayscale or RGB depending on channels).
void save_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Mask as an 8-bit grayscale PNG, 0 or 255.
void save_mask_png(const GroundTruthMask& mask, const std::filesystem::path& path);
GroundTruthMask load_mask_png(const std::filesystem::path& path);

void save_ppm(const ImageBuffer& img, const std::filesystem::path& path);

}  // namespace splicedet
