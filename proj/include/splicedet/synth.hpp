#pragma once

#include "splicedet/image.hpp"
#include "splicedet/rng.hpp"
#include "splicedet/types.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace splicedet {

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool inside(int width, int height) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
  }
};

struct SpliceSpec {
  Rect donor_region;
  int paste_x = 0, paste_y = 0;
  int blend_width = 0;  // linear alpha feather, must be < min(w,h)/2
  int donor_quality = 70;
  int target_quality = 95;
};

enum class CopyMoveTransform { none, hflip, rotate90, scale };

const char* to_string(CopyMoveTransform t);
CopyMoveTransform copy_move_transform_from_string(const std::string& s);

struct CopyMoveSpec {
  Rect source;
  int dest_x = 0, dest_y = 0;
  CopyMoveTransform transform = CopyMoveTransform::none;
  double scale = 1.0;  // only for transform == scale, in [0.5, 2]
};

/// Donor region is JPEG round-tripped at donor_quality, pasted with a linear
/// alpha feather, and the composite is round-tripped at target_quality. The
/// mask marks pixels whose paste alpha exceeds 0.5.
std::pair<ImageBuffer, GroundTruthMask> make_splice(const ImageBuffer& target,
                                                    const ImageBuffer& donor,
                                                    const SpliceSpec& spec, Rng& rng);

/// Source region transformed and written at the destination; the mask marks
/// the written destination rectangle.
std::pair<ImageBuffer, GroundTruthMask> make_copy_move(const ImageBuffer& img,
                                                       const CopyMoveSpec& spec,
                                                       Rng& rng);

/// Multi-octave value noise plus a random linear gradient, remapped to a
/// mid-range band so codec clamping stays out of play. Seeded and
/// deterministic; lets the test suite run without external photos.
ImageBuffer procedural_image(int width, int height, int channels, Rng& rng);

struct SynthConfig {
  int n_authentic = 100;
  int n_tampered = 100;
  int width = 256;
  int height = 256;
  int donor_quality = 70;
  int target_quality = 95;
  /// Authentic images get the same final compression as tampered ones so the
  /// two classes differ only inside the spliced region; 0 disables.
  int authentic_quality = 95;
  double copymove_fraction = 0.0;
  int min_region = 64;
  int max_region = 128;
  int max_blend_width = 6;
  std::uint64_t seed = 0;
};

struct ManifestItem {
  std::string file;             // path relative to the dataset root
  std::string kind;             // authentic | splice | copymove
  std::string mask;             // empty for authentic
  std::uint64_t item_seed = 0;
  // populated for splice items
  SpliceSpec splice;
  // populated for copymove items
  CopyMoveSpec copymove;
};

struct Manifest {
  SynthConfig config;
  std::vector<ManifestItem> items;
};

/// Writes authentic/, tampered/, masks/ and manifest.json under out_dir.
/// Bit-identical regeneration from the same config and seed.
Manifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

std::string manifest_to_json(const Manifest& m);

}  // namespace splicedet
