#include "splicedet/heatmap.hpp"

#include "splicedet/image_io.hpp"

#include <algorithm>
#include <cmath>

namespace splicedet {

Eigen::Vector3d hot_colormap(int index) {
  auto ramp = [](int v) { return std::clamp(v, 0, 255) / 255.0; };
  return {ramp(3 * index), ramp(3 * index - 255), ramp(3 * index - 510)};
}

ImageBuffer render_heatmap(int width, int height, const std::vector<Patch>& patches,
                           const std::vector<double>& patch_scores) {
  if (patches.empty() || patches.size() != patch_scores.size())
    throw ArgumentError("render_heatmap: need one score per patch");

  Array2D sum = Array2D::Zero(height, width);
  Array2D count = Array2D::Zero(height, width);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const Patch& p = patches[i];
    for (int y = p.y0; y < p.y0 + p.size && y < height; ++y)
      for (int x = p.x0; x < p.x0 + p.size && x < width; ++x) {
        sum(y, x) += patch_scores[i];
        count(y, x) += 1.0;
      }
  }

  Array2D field(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      field(y, x) = count(y, x) > 0 ? sum(y, x) / count(y, x) : 0.0;

  double lo = field.minCoeff(), hi = field.maxCoeff();
  ImageBuffer out = ImageBuffer::zeros(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = hi - lo > 1e-12 ? (field(y, x) - lo) / (hi - lo) : 0.5;
      Eigen::Vector3d rgb = hot_colormap(int(std::lround(v * 255.0)));
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = rgb[c];
    }
  }
  return out;
}

void emit_heatmap(int width, int height, const std::vector<Patch>& patches,
                  const std::vector<double>& patch_scores,
                  const std::filesystem::path& path) {
  save_png(render_heatmap(width, height, patches, patch_scores), path);
}

}  // namespace splicedet
