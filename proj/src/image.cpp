#include "splicedet/image.hpp"

#include <algorithm>
#include <cmath>

namespace splicedet {

ImageBuffer ImageBuffer::zeros(int width, int height, int channels) {
  ImageBuffer img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data = Eigen::ArrayXd::Zero(std::size_t(width) * height * channels);
  return img;
}

ImageBuffer ImageBuffer::constant(int width, int height, int channels, double value) {
  ImageBuffer img = zeros(width, height, channels);
  img.data.setConstant(value);
  return img;
}

Array2D ImageBuffer::channel(int c) const {
  Array2D out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(y, x) = at(y, x, c);
  return out;
}

void ImageBuffer::set_channel(int c, const Array2D& plane) {
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) at(y, x, c) = plane(y, x);
}

Array2D ImageBuffer::plane() const {
  if (channels != 1) throw ArgumentError("plane() requires a single-channel image");
  return channel(0);
}

ImageBuffer ImageBuffer::from_plane(const Array2D& plane) {
  ImageBuffer img = zeros(int(plane.cols()), int(plane.rows()), 1);
  img.set_channel(0, plane);
  return img;
}

ImageBuffer ImageBuffer::from_channels(const Array2D& r, const Array2D& g,
                                       const Array2D& b) {
  ImageBuffer img = zeros(int(r.cols()), int(r.rows()), 3);
  img.set_channel(0, r);
  img.set_channel(1, g);
  img.set_channel(2, b);
  return img;
}

void ImageBuffer::clamp01() { data = data.min(1.0).max(0.0); }

GroundTruthMask GroundTruthMask::zeros(int width, int height) {
  GroundTruthMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(std::size_t(width) * height, 0);
  return m;
}

std::size_t GroundTruthMask::ones() const {
  std::size_t n = 0;
  for (auto b : bits) n += (b != 0);
  return n;
}

const char* to_string(PatchLabel label) {
  switch (label) {
    case PatchLabel::authentic: return "authentic";
    case PatchLabel::tampered: return "tampered";
    default: return "unlabeled";
  }
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw ArgumentError("to_grayscale: channels must be 1 or 3");
  ImageBuffer out = ImageBuffer::zeros(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(y, x, 0) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                        0.114 * img.at(y, x, 2);
  return out;
}

namespace {

std::vector<int> window_anchors(int dim, int size, int stride) {
  std::vector<int> anchors;
  for (int p = 0; p + size <= dim; p += stride) anchors.push_back(p);
  if (anchors.back() != dim - size) anchors.push_back(dim - size);
  return anchors;
}

ImageBuffer crop(const ImageBuffer& img, int x0, int y0, int w, int h) {
  ImageBuffer out = ImageBuffer::zeros(w, h, img.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
  return out;
}

}  // namespace

std::vector<Patch> extract_patches(const ImageBuffer& img, int size, int stride,
                                   const std::string& source_id) {
  if (size > img.width || size > img.height)
    throw ArgumentError("extract_patches: patch size exceeds image dimension");
  if (stride < 1) throw ArgumentError("extract_patches: stride must be >= 1");

  const auto xs = window_anchors(img.width, size, stride);
  const auto ys = window_anchors(img.height, size, stride);
  std::vector<Patch> patches;
  patches.reserve(xs.size() * ys.size());
  for (int y0 : ys) {
    for (int x0 : xs) {
      Patch p;
      p.source_id = source_id;
      p.x0 = x0;
      p.y0 = y0;
      p.size = size;
      p.pixels = crop(img, x0, y0, size, size);
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

void label_patches(std::vector<Patch>& patches, const GroundTruthMask& mask,
                   double tamper_threshold) {
  for (auto& p : patches) {
    if (p.x0 + p.size > mask.width || p.y0 + p.size > mask.height)
      throw ArgumentError("label_patches: mask does not cover patch window");
    std::size_t ones = 0;
    for (int y = 0; y < p.size; ++y)
      for (int x = 0; x < p.size; ++x) ones += (mask.at(p.y0 + y, p.x0 + x) != 0);
    p.tamper_fraction = double(ones) / (double(p.size) * p.size);
    if (p.tamper_fraction >= tamper_threshold)
      p.label = PatchLabel::tampered;
    else if (ones == 0)
      p.label = PatchLabel::authentic;
    else
      p.label = PatchLabel::unlabeled;
  }
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int out_width, int out_height) {
  ImageBuffer out = ImageBuffer::zeros(out_width, out_height, img.channels);
  const double sx = out_width > 1 ? double(img.width - 1) / (out_width - 1) : 0.0;
  const double sy = out_height > 1 ? double(img.height - 1) / (out_height - 1) : 0.0;
  for (int y = 0; y < out_height; ++y) {
    double v = y * sy;
    int y0 = std::min(int(v), img.height - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fy = v - y0;
    for (int x = 0; x < out_width; ++x) {
      double u = x * sx;
      int x0 = std::min(int(u), img.width - 1);
      int x1 = std::min(x0 + 1, img.width - 1);
      double fx = u - x0;
      for (int c = 0; c < img.channels; ++c) {
        double top = (1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
        double bot = (1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
        out.at(y, x, c) = (1 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

Patch augment(const Patch& patch, const AugmentConfig& config, Rng& rng) {
  Patch out = patch;
  const int size = patch.pixels.width;

  if (rng.uniform() < config.flip_probability) {
    ImageBuffer flipped = out.pixels;
    for (int y = 0; y < flipped.height; ++y)
      for (int x = 0; x < flipped.width; ++x)
        for (int c = 0; c < flipped.channels; ++c)
          flipped.at(y, x, c) = out.pixels.at(y, flipped.width - 1 - x, c);
    out.pixels = flipped;
  }

  if (rng.uniform() < config.crop_probability) {
    double frac = rng.uniform(config.min_crop_fraction, 1.0);
    int cs = std::max(2, int(std::lround(size * frac)));
    cs = std::min(cs, size);
    int maxoff = size - cs;
    int ox = maxoff > 0 ? int(rng.index(std::size_t(maxoff) + 1)) : 0;
    int oy = maxoff > 0 ? int(rng.index(std::size_t(maxoff) + 1)) : 0;
    ImageBuffer cropped = ImageBuffer::zeros(cs, cs, out.pixels.channels);
    for (int y = 0; y < cs; ++y)
      for (int x = 0; x < cs; ++x)
        for (int c = 0; c < out.pixels.channels; ++c)
          cropped.at(y, x, c) = out.pixels.at(oy + y, ox + x, c);
    out.pixels = resize_bilinear(cropped, size, size);
  }

  if (rng.uniform() < config.color_probability) {
    double shift = rng.uniform(-config.max_brightness_shift, config.max_brightness_shift);
    double scale = rng.uniform(config.contrast_low, config.contrast_high);
    // Contrast pivots at mid-gray so the jitter does not drift exposure.
    out.pixels.data = ((out.pixels.data - 0.5) * scale + 0.5 + shift);
  }

  out.pixels.clamp01();
  return out;
}

}  // namespace splicedet
