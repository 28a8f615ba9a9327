#include "splicedet/image_io.hpp"
#include "splicedet/jpeg_codec.hpp"
#include "splicedet/sha256.hpp"
#include "splicedet/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>

using namespace splicedet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / "splicedet_synth_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ImageBuffer smooth_test_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  return procedural_image(w, h, 3, rng);
}

/// Codec reimplementation on one plane via the direct-summation DCT oracle.
Array2D roundtrip_plane_oracle(const Array2D& plane, int quality) {
  Matrix8 q = jpeg_quant_table(quality);
  int h = int(plane.rows()), w = int(plane.cols());
  REQUIRE(h % 8 == 0);
  REQUIRE(w % 8 == 0);
  Array2D out(h, w);
  for (int by = 0; by < h / 8; ++by) {
    for (int bx = 0; bx < w / 8; ++bx) {
      Matrix8 block = plane.block(8 * by, 8 * bx, 8, 8).matrix() * 255.0;
      block.array() -= 128.0;
      Matrix8 coeffs = oracles::dct2_direct(block);
      Matrix8 deq = oracles::quantize_block(coeffs, q);
      Matrix8 rec = oracles::idct2_direct(deq);
      out.block(8 * by, 8 * bx, 8, 8) =
          (((rec.array() + 128.0) / 255.0).min(1.0).max(0.0));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("quant table: quality scaling formula") {
  Matrix8 q100 = jpeg_quant_table(100);
  CHECK(q100.minCoeff() == 1.0);
  CHECK(q100.maxCoeff() == 1.0);
  Matrix8 q50 = jpeg_quant_table(50);
  CHECK(q50(0, 0) == 16.0);  // scale 100 keeps the base table
  Matrix8 q10 = jpeg_quant_table(10);
  CHECK(q10(0, 0) == doctest::Approx(80.0));  // floor((16*500+50)/100)
  CHECK_THROWS_AS(jpeg_quant_table(0), ArgumentError);
  CHECK_THROWS_AS(jpeg_quant_table(101), ArgumentError);
}

TEST_CASE("jpeg_roundtrip at quality 100 only rounds coefficients") {
  // Smooth content: per-block coefficient rounding stays within one intensity
  // level in the pixel domain.
  ImageBuffer img = ImageBuffer::zeros(64, 64, 1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      img.at(y, x, 0) = 0.5 + 0.3 * std::sin(2.0 * M_PI * x / 37.0) *
                                  std::cos(2.0 * M_PI * y / 29.0);
  ImageBuffer out = jpeg_roundtrip(img, 100);
  double max_err = (out.data - img.data).abs().maxCoeff();
  CHECK(max_err <= 1.0 / 255.0);
}

TEST_CASE("jpeg_roundtrip matches the direct-summation oracle") {
  ImageBuffer img = smooth_test_image(32, 32, 12);
  for (int quality : {35, 70, 95}) {
    ImageBuffer out = jpeg_roundtrip(img, quality);
    for (int c = 0; c < 3; ++c) {
      Array2D expected = roundtrip_plane_oracle(img.channel(c), quality);
      CHECK((out.channel(c) - expected).abs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("jpeg_roundtrip: constant mid-gray survives any quality") {
  ImageBuffer img = ImageBuffer::constant(40, 24, 1, 0.5);
  for (int quality : {5, 30, 75, 100}) {
    ImageBuffer out = jpeg_roundtrip(img, quality);
    CHECK((out.data - 0.5).abs().maxCoeff() <= 1.0 / 255.0);
    double spread = out.data.maxCoeff() - out.data.minCoeff();
    CHECK(spread <= 1e-12);  // stays constant: DC-only block
  }
}

TEST_CASE("jpeg_roundtrip converges to a fixed point quickly") {
  ImageBuffer img = smooth_test_image(48, 48, 13);
  ImageBuffer once = jpeg_roundtrip(img, 70);
  double first_change = (once.data - img.data).abs().maxCoeff();
  ImageBuffer twice = jpeg_roundtrip(once, 70);
  double second_change = (twice.data - once.data).abs().maxCoeff();
  CHECK(second_change <= first_change);
  ImageBuffer thrice = jpeg_roundtrip(twice, 70);
  CHECK((thrice.data - twice.data).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("jpeg_roundtrip error energy non-increasing in quality") {
  ImageBuffer img = smooth_test_image(64, 64, 14);
  double prev = 1e300;
  for (int quality : {50, 70, 90, 100}) {
    ImageBuffer out = jpeg_roundtrip(img, quality);
    double energy = (out.data - img.data).square().sum();
    CHECK(energy <= prev + 1e-12);
    prev = energy;
  }
  ImageBuffer out = jpeg_roundtrip(img, 80);
  CHECK(out.width == img.width);
  CHECK(out.data.minCoeff() >= 0.0);
  CHECK(out.data.maxCoeff() <= 1.0);
}

TEST_CASE("make_splice degenerate full-image paste equals a plain roundtrip") {
  ImageBuffer img = smooth_test_image(64, 64, 15);
  SpliceSpec spec;
  spec.donor_region = {0, 0, 64, 64};
  spec.paste_x = spec.paste_y = 0;
  spec.blend_width = 0;
  spec.donor_quality = spec.target_quality = 80;
  Rng rng(0);
  auto [forged, mask] = make_splice(img, img, spec, rng);
  ImageBuffer plain = jpeg_roundtrip(img, 80);
  CHECK((forged.data - plain.data).abs().maxCoeff() <= 1e-12);
  CHECK(mask.ones() == 64u * 64u);
}

TEST_CASE("make_splice mask area and ELA detectability premise") {
  ImageBuffer target = smooth_test_image(128, 128, 16);
  ImageBuffer donor = smooth_test_image(128, 128, 17);
  SpliceSpec spec;
  spec.donor_region = {8, 8, 48, 48};
  spec.paste_x = 40;
  spec.paste_y = 40;
  spec.blend_width = 0;
  spec.donor_quality = 70;
  spec.target_quality = 95;
  Rng rng(0);
  auto [forged, mask] = make_splice(target, donor, spec, rng);
  CHECK(mask.ones() == 48u * 48u);

  // Detectability premise: the ELA residual separates the donor region from
  // the rest. With donor quality 70 below the ELA quality 90, the pasted
  // region is compression-saturated, so its residual is the *smaller* side.
  ImageBuffer rt = jpeg_roundtrip(forged, 90);
  double in_sum = 0, out_sum = 0, in_n = 0, out_n = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) {
      double r = 0;
      for (int c = 0; c < 3; ++c) r += std::abs(forged.at(y, x, c) - rt.at(y, x, c));
      if (mask.at(y, x)) {
        in_sum += r;
        in_n += 1;
      } else {
        out_sum += r;
        out_n += 1;
      }
    }
  CHECK(out_sum / out_n > 1.5 * (in_sum / in_n));
}

TEST_CASE("make_splice rejects invalid specs") {
  ImageBuffer img = smooth_test_image(64, 64, 18);
  SpliceSpec spec;
  spec.donor_region = {40, 40, 32, 32};  // exceeds donor bounds
  Rng rng(0);
  CHECK_THROWS_AS(make_splice(img, img, spec, rng), ArgumentError);
  spec.donor_region = {0, 0, 32, 32};
  spec.paste_x = 40;
  spec.paste_y = 40;  // exceeds target bounds
  CHECK_THROWS_AS(make_splice(img, img, spec, rng), ArgumentError);
  spec.paste_x = spec.paste_y = 0;
  spec.blend_width = 16;  // >= min(w,h)/2
  CHECK_THROWS_AS(make_splice(img, img, spec, rng), ArgumentError);
}

TEST_CASE("make_copy_move: identity, hflip, scale") {
  ImageBuffer img = smooth_test_image(64, 64, 19);
  Rng rng(0);

  CopyMoveSpec same;
  same.source = {8, 8, 16, 16};
  same.dest_x = 8;
  same.dest_y = 8;
  same.transform = CopyMoveTransform::none;
  auto [unchanged, mask1] = make_copy_move(img, same, rng);
  CHECK((unchanged.data - img.data).abs().maxCoeff() == 0.0);
  CHECK(mask1.ones() == 16u * 16u);

  CopyMoveSpec flip;
  flip.source = {0, 0, 8, 8};
  flip.dest_x = 32;
  flip.dest_y = 32;
  flip.transform = CopyMoveTransform::hflip;
  auto [flipped, mask2] = make_copy_move(img, flip, rng);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      CHECK(flipped.at(32 + y, 32 + x, 0) == img.at(y, 7 - x, 0));

  CopyMoveSpec grow;
  grow.source = {4, 4, 16, 16};
  grow.dest_x = 20;
  grow.dest_y = 20;
  grow.transform = CopyMoveTransform::scale;
  grow.scale = 2.0;
  auto [scaled, mask3] = make_copy_move(img, grow, rng);
  CHECK(mask3.ones() == 32u * 32u);

  CopyMoveSpec oob = grow;
  oob.dest_x = 50;  // 50 + 32 > 64
  CHECK_THROWS_AS(make_copy_move(img, oob, rng), ArgumentError);
}

TEST_CASE("generate_dataset is bit-identical under one seed") {
  SynthConfig config;
  config.n_authentic = 3;
  config.n_tampered = 3;
  config.width = config.height = 64;
  config.min_region = 24;
  config.max_region = 32;
  config.seed = 42;

  fs::path a = temp_dir("gen_a"), b = temp_dir("gen_b");
  Manifest ma = generate_dataset(config, a);
  Manifest mb = generate_dataset(config, b);
  CHECK(ma.items.size() == 6);

  int tampered_in_manifest = 0;
  for (const auto& item : ma.items) {
    fs::path fa = a / item.file, fb = b / item.file;
    REQUIRE(fs::exists(fa));
    CHECK(sha256_file(fa) == sha256_file(fb));
    if (item.kind != "authentic") {
      ++tampered_in_manifest;
      GroundTruthMask mask = load_mask_png(a / item.mask);
      CHECK(mask.ones() >= 1u);
      CHECK(sha256_file(a / item.mask) == sha256_file(b / item.mask));
    }
  }
  CHECK(tampered_in_manifest == 3);
  CHECK(sha256_file(a / "manifest.json") == sha256_file(b / "manifest.json"));
}
