#pragma once

#include "splicedet/rng.hpp"
#include "splicedet/types.hpp"

#include <string>
#include <vector>

namespace splicedet {

/// Raster image, values in [0,1], row-major and channel-interleaved:
/// data[(y*width + x)*channels + c].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  Eigen::ArrayXd data;

  static ImageBuffer zeros(int width, int height, int channels);
  static ImageBuffer constant(int width, int height, int channels, double value);

  bool empty() const { return width == 0 || height == 0; }
  std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }

  double& at(int y, int x, int c) {
    return data[(std::size_t(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(std::size_t(y) * width + x) * channels + c];
  }

  /// One channel as a height x width array.
  Array2D channel(int c) const;
  void set_channel(int c, const Array2D& plane);
  /// Single-channel image as an array; requires channels == 1.
  Array2D plane() const;
  static ImageBuffer from_plane(const Array2D& plane);
  static ImageBuffer from_channels(const Array2D& r, const Array2D& g, const Array2D& b);

  void clamp01();
};

/// Binary tamper mask; bits[y*width + x] != 0 means tampered.
struct GroundTruthMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  static GroundTruthMask zeros(int width, int height);
  std::uint8_t at(int y, int x) const { return bits[std::size_t(y) * width + x]; }
  void set(int y, int x, std::uint8_t v) { bits[std::size_t(y) * width + x] = v; }
  std::size_t ones() const;
};

enum class PatchLabel { authentic, tampered, unlabeled };

const char* to_string(PatchLabel label);

/// Square sliding-window view with provenance and (optional) tamper label.
struct Patch {
  std::string source_id;
  int x0 = 0;
  int y0 = 0;
  int size = 0;
  ImageBuffer pixels;
  PatchLabel label = PatchLabel::unlabeled;
  double tamper_fraction = 0.0;
};

/// BT.601 luma; single-channel input is returned unchanged.
ImageBuffer to_grayscale(const ImageBuffer& img);

/// Windows on the stride grid plus, per axis, one window anchored to the far
/// edge when the grid does not reach it. Every pixel is covered.
std::vector<Patch> extract_patches(const ImageBuffer& img, int size, int stride,
                                   const std::string& source_id = "");

/// Labels each patch from the mask: tamper_fraction = ones in window / size^2,
/// tampered at fraction >= threshold, authentic at exactly 0, else unlabeled.
void label_patches(std::vector<Patch>& patches, const GroundTruthMask& mask,
                   double tamper_threshold = 0.10);

struct AugmentConfig {
  double flip_probability = 0.5;
  double crop_probability = 0.5;
  double color_probability = 0.5;
  double min_crop_fraction = 0.75;   // crop side length >= this fraction of size
  double max_brightness_shift = 0.1;
  double contrast_low = 0.9;
  double contrast_high = 1.1;
};

/// Training-time augmentation: horizontal flip, random crop + bilinear rescale
/// back to the original size, brightness/contrast jitter. Dimensions and the
/// [0,1] range are preserved; identical seeds give identical outputs.
Patch augment(const Patch& patch, const AugmentConfig& config, Rng& rng);

/// Bilinear resize (align-corners sampling). Used by augment and the
/// copy-move scale transform.
ImageBuffer resize_bilinear(const ImageBuffer& img, int out_width, int out_height);

}  // namespace splicedet
