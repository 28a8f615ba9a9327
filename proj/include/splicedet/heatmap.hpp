#pragma once

#include "splicedet/image.hpp"

#include <filesystem>
#include <vector>

namespace splicedet {

/// 256-entry monotone "hot" colormap: black -> red -> yellow -> white,
/// r = min(255, 3i), g = clamp(3i-255), b = clamp(3i-510). Luminance is
/// strictly increasing in the index.
Eigen::Vector3d hot_colormap(int index);

/// Per-pixel mean of the covering patches' scores, min-max normalized over
/// the image (a flat score field maps to mid-color), rendered through the
/// hot colormap. Output dims equal input dims.
ImageBuffer render_heatmap(int width, int height, const std::vector<Patch>& patches,
                           const std::vector<double>& patch_scores);

void emit_heatmap(int width, int height, const std::vector<Patch>& patches,
                  const std::vector<double>& patch_scores,
                  const std::filesystem::path& path);

}  // namespace splicedet
