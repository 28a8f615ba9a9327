#include "splicedet/synth.hpp"

#include "splicedet/image_io.hpp"
#include "splicedet/jpeg_codec.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace splicedet {

using nlohmann::json;

const char* to_string(CopyMoveTransform t) {
  switch (t) {
    case CopyMoveTransform::none: return "none";
    case CopyMoveTransform::hflip: return "hflip";
    case CopyMoveTransform::rotate90: return "rotate90";
    default: return "scale";
  }
}

CopyMoveTransform copy_move_transform_from_string(const std::string& s) {
  if (s == "none") return CopyMoveTransform::none;
  if (s == "hflip") return CopyMoveTransform::hflip;
  if (s == "rotate90") return CopyMoveTransform::rotate90;
  if (s == "scale") return CopyMoveTransform::scale;
  throw FormatError("unknown copy-move transform: " + s);
}

namespace {

ImageBuffer crop_region(const ImageBuffer& img, const Rect& r) {
  ImageBuffer out = ImageBuffer::zeros(r.w, r.h, img.channels);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = img.at(r.y + y, r.x + x, c);
  return out;
}

/// Feather weight for offset (i,j) inside a w x h paste rectangle.
double paste_alpha(int i, int j, int w, int h, int blend_width) {
  if (blend_width == 0) return 1.0;
  int d = std::min(std::min(j, i), std::min(w - 1 - j, h - 1 - i));
  return std::min(1.0, double(d + 1) / double(blend_width + 1));
}

}  // namespace

std::pair<ImageBuffer, GroundTruthMask> make_splice(const ImageBuffer& target,
                                                    const ImageBuffer& donor,
                                                    const SpliceSpec& spec, Rng&) {
  const Rect& r = spec.donor_region;
  if (!r.inside(donor.width, donor.height))
    throw ArgumentError("make_splice: donor region out of bounds");
  if (spec.paste_x < 0 || spec.paste_y < 0 || spec.paste_x + r.w > target.width ||
      spec.paste_y + r.h > target.height)
    throw ArgumentError("make_splice: paste region out of bounds");
  if (spec.blend_width < 0 || 2 * spec.blend_width >= std::min(r.w, r.h))
    throw ArgumentError("make_splice: blend width too large for region");
  if (target.channels != donor.channels)
    throw ArgumentError("make_splice: channel mismatch");

  ImageBuffer donor_rt = jpeg_roundtrip(donor, spec.donor_quality);
  ImageBuffer out = target;
  GroundTruthMask mask = GroundTruthMask::zeros(target.width, target.height);
  for (int i = 0; i < r.h; ++i) {
    for (int j = 0; j < r.w; ++j) {
      double a = paste_alpha(i, j, r.w, r.h, spec.blend_width);
      int ty = spec.paste_y + i, tx = spec.paste_x + j;
      for (int c = 0; c < target.channels; ++c) {
        double d = donor_rt.at(r.y + i, r.x + j, c);
        out.at(ty, tx, c) = a * d + (1.0 - a) * out.at(ty, tx, c);
      }
      if (a > 0.5) mask.set(ty, tx, 1);
    }
  }
  return {jpeg_roundtrip(out, spec.target_quality), std::move(mask)};
}

std::pair<ImageBuffer, GroundTruthMask> make_copy_move(const ImageBuffer& img,
                                                       const CopyMoveSpec& spec, Rng&) {
  if (!spec.source.inside(img.width, img.height))
    throw ArgumentError("make_copy_move: source region out of bounds");

  ImageBuffer region = crop_region(img, spec.source);
  switch (spec.transform) {
    case CopyMoveTransform::none:
      break;
    case CopyMoveTransform::hflip: {
      ImageBuffer flipped = region;
      for (int y = 0; y < region.height; ++y)
        for (int x = 0; x < region.width; ++x)
          for (int c = 0; c < region.channels; ++c)
            flipped.at(y, x, c) = region.at(y, region.width - 1 - x, c);
      region = std::move(flipped);
      break;
    }
    case CopyMoveTransform::rotate90: {
      // 90 degrees clockwise: (y,x) -> (x, H-1-y).
      ImageBuffer rot = ImageBuffer::zeros(region.height, region.width, region.channels);
      for (int y = 0; y < region.height; ++y)
        for (int x = 0; x < region.width; ++x)
          for (int c = 0; c < region.channels; ++c)
            rot.at(x, region.height - 1 - y, c) = region.at(y, x, c);
      region = std::move(rot);
      break;
    }
    case CopyMoveTransform::scale: {
      if (spec.scale < 0.5 || spec.scale > 2.0)
        throw ArgumentError("make_copy_move: scale must be in [0.5,2]");
      int nw = std::max(1, int(std::lround(region.width * spec.scale)));
      int nh = std::max(1, int(std::lround(region.height * spec.scale)));
      region = resize_bilinear(region, nw, nh);
      break;
    }
  }

  if (spec.dest_x < 0 || spec.dest_y < 0 || spec.dest_x + region.width > img.width ||
      spec.dest_y + region.height > img.height)
    throw ArgumentError("make_copy_move: destination out of bounds");

  ImageBuffer out = img;
  GroundTruthMask mask = GroundTruthMask::zeros(img.width, img.height);
  for (int y = 0; y < region.height; ++y)
    for (int x = 0; x < region.width; ++x) {
      for (int c = 0; c < img.channels; ++c)
        out.at(spec.dest_y + y, spec.dest_x + x, c) = region.at(y, x, c);
      mask.set(spec.dest_y + y, spec.dest_x + x, 1);
    }
  return {std::move(out), std::move(mask)};
}

namespace {

/// Value-noise octave: (cells x cells) lattice of uniform values, bilinearly
/// sampled over the full image.
Array2D value_noise(int width, int height, int cells, Rng& rng) {
  Array2D lattice(cells + 1, cells + 1);
  for (int y = 0; y <= cells; ++y)
    for (int x = 0; x <= cells; ++x) lattice(y, x) = rng.uniform(-1.0, 1.0);
  Array2D out(height, width);
  for (int y = 0; y < height; ++y) {
    double v = double(y) / height * cells;
    int y0 = std::min(int(v), cells - 1);
    double fy = v - y0;
    for (int x = 0; x < width; ++x) {
      double u = double(x) / width * cells;
      int x0 = std::min(int(u), cells - 1);
      double fx = u - x0;
      double top = (1 - fx) * lattice(y0, x0) + fx * lattice(y0, x0 + 1);
      double bot = (1 - fx) * lattice(y0 + 1, x0) + fx * lattice(y0 + 1, x0 + 1);
      out(y, x) = (1 - fy) * top + fy * bot;
    }
  }
  return out;
}

}  // namespace

ImageBuffer procedural_image(int width, int height, int channels, Rng& rng) {
  Array2D lum = Array2D::Zero(height, width);
  double amp = 1.0;
  for (int cells = 4; cells <= std::min(width, height) / 2; cells *= 2) {
    lum += amp * value_noise(width, height, cells, rng);
    amp *= 0.55;
  }
  double gx = rng.uniform(-0.5, 0.5), gy = rng.uniform(-0.5, 0.5);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      lum(y, x) += gx * double(x) / width + gy * double(y) / height;

  // Sensor-style grain so noise statistics have something to measure.
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) lum(y, x) += 0.02 * rng.normal();

  double lo = lum.minCoeff(), hi = lum.maxCoeff();
  double span = hi - lo > 1e-12 ? hi - lo : 1.0;
  lum = (lum - lo) / span * 0.7 + 0.15;  // keep clear of the clamp rails

  if (channels == 1) return ImageBuffer::from_plane(lum);

  Array2D rgb[3];
  for (int c = 0; c < 3; ++c) {
    double cast = rng.uniform(-0.04, 0.04);
    Array2D tint = value_noise(width, height, 8, rng);
    rgb[c] = (lum + cast + 0.05 * tint).min(1.0).max(0.0);
  }
  return ImageBuffer::from_channels(rgb[0], rgb[1], rgb[2]);
}

namespace {

std::string item_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.png", prefix, index);
  return buf;
}

json rect_to_json(const Rect& r) { return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

}  // namespace

Manifest generate_dataset(const SynthConfig& config,
                          const std::filesystem::path& out_dir) {
  if (config.n_authentic < 2)
    throw ArgumentError("generate_dataset: need at least 2 authentic images");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "authentic", ec);
  fs::create_directories(out_dir / "tampered", ec);
  fs::create_directories(out_dir / "masks", ec);
  if (!fs::is_directory(out_dir / "masks"))
    throw IoError("cannot create dataset directory: " + out_dir.string());

  Manifest manifest;
  manifest.config = config;
  Rng root(config.seed);

  for (int i = 0; i < config.n_authentic; ++i) {
    Rng item_rng = root.fork(0x1000 + std::uint64_t(i));
    ImageBuffer img = procedural_image(config.width, config.height, 3, item_rng);
    if (config.authentic_quality > 0)
      img = jpeg_roundtrip(img, config.authentic_quality);
    ManifestItem item;
    item.kind = "authentic";
    item.file = "authentic/" + item_name("au", i);
    item.item_seed = item_rng.seed();
    save_png(img, out_dir / item.file);
    manifest.items.push_back(std::move(item));
  }

  for (int i = 0; i < config.n_tampered; ++i) {
    Rng item_rng = root.fork(0x2000 + std::uint64_t(i));
    ImageBuffer target = procedural_image(config.width, config.height, 3, item_rng);
    bool copymove = item_rng.uniform() < config.copymove_fraction;

    int span = std::max(1, config.max_region - config.min_region + 1);
    int rw = config.min_region + int(item_rng.index(std::size_t(span)));
    int rh = config.min_region + int(item_rng.index(std::size_t(span)));
    rw = std::min(rw, config.width);
    rh = std::min(rh, config.height);

    ManifestItem item;
    item.file = "tampered/" + item_name("tp", i);
    item.mask = "masks/" + item_name("tp", i);
    item.item_seed = item_rng.seed();

    ImageBuffer forged;
    GroundTruthMask mask;
    if (copymove) {
      CopyMoveSpec spec;
      spec.source = Rect{int(item_rng.index(std::size_t(config.width - rw + 1))),
                         int(item_rng.index(std::size_t(config.height - rh + 1))), rw, rh};
      spec.dest_x = int(item_rng.index(std::size_t(config.width - rw + 1)));
      spec.dest_y = int(item_rng.index(std::size_t(config.height - rh + 1)));
      const CopyMoveTransform choices[3] = {CopyMoveTransform::none,
                                            CopyMoveTransform::hflip,
                                            CopyMoveTransform::rotate90};
      spec.transform = choices[item_rng.index(3)];
      std::tie(forged, mask) = make_copy_move(target, spec, item_rng);
      if (config.target_quality > 0)
        forged = jpeg_roundtrip(forged, config.target_quality);
      item.kind = "copymove";
      item.copymove = spec;
    } else {
      ImageBuffer donor = procedural_image(config.width, config.height, 3, item_rng);
      SpliceSpec spec;
      spec.donor_region =
          Rect{int(item_rng.index(std::size_t(config.width - rw + 1))),
               int(item_rng.index(std::size_t(config.height - rh + 1))), rw, rh};
      spec.paste_x = int(item_rng.index(std::size_t(config.width - rw + 1)));
      spec.paste_y = int(item_rng.index(std::size_t(config.height - rh + 1)));
      int max_bw = std::min(config.max_blend_width, (std::min(rw, rh) - 1) / 2);
      spec.blend_width = max_bw > 0 ? int(item_rng.index(std::size_t(max_bw) + 1)) : 0;
      spec.donor_quality = config.donor_quality;
      spec.target_quality = config.target_quality;
      std::tie(forged, mask) = make_splice(target, donor, spec, item_rng);
      item.kind = "splice";
      item.splice = spec;
    }

    save_png(forged, out_dir / item.file);
    save_mask_png(mask, out_dir / item.mask);
    manifest.items.push_back(std::move(item));
  }

  std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
  if (!mf) throw IoError("cannot write manifest.json");
  mf << manifest_to_json(manifest) << "\n";
  return manifest;
}

std::string manifest_to_json(const Manifest& m) {
  json j;
  j["seed"] = m.config.seed;
  j["config"] = {{"n_authentic", m.config.n_authentic},
                 {"n_tampered", m.config.n_tampered},
                 {"width", m.config.width},
                 {"height", m.config.height},
                 {"donor_quality", m.config.donor_quality},
                 {"target_quality", m.config.target_quality},
                 {"authentic_quality", m.config.authentic_quality},
                 {"copymove_fraction", m.config.copymove_fraction},
                 {"min_region", m.config.min_region},
                 {"max_region", m.config.max_region},
                 {"max_blend_width", m.config.max_blend_width}};
  j["items"] = json::array();
  for (const auto& it : m.items) {
    json ji{{"file", it.file}, {"kind", it.kind}, {"seed", it.item_seed}};
    if (!it.mask.empty()) ji["mask"] = it.mask;
    if (it.kind == "splice") {
      ji["spec"] = {{"donor_region", rect_to_json(it.splice.donor_region)},
                    {"paste_x", it.splice.paste_x},
                    {"paste_y", it.splice.paste_y},
                    {"blend_width", it.splice.blend_width},
                    {"donor_quality", it.splice.donor_quality},
                    {"target_quality", it.splice.target_quality}};
    } else if (it.kind == "copymove") {
      ji["spec"] = {{"source", rect_to_json(it.copymove.source)},
                    {"dest_x", it.copymove.dest_x},
                    {"dest_y", it.copymove.dest_y},
                    {"transform", to_string(it.copymove.transform)},
                    {"scale", it.copymove.scale}};
    }
    j["items"].push_back(std::move(ji));
  }
  return j.dump(2);
}

}  // namespace splicedet
