#include "splicedet/image.hpp"
#include "splicedet/image_io.hpp"
#include "splicedet/rng.hpp"
#include "splicedet/sha256.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace splicedet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "splicedet_core_tests";
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

ImageBuffer random_image(int w, int h, int c, std::uint64_t seed) {
  Rng rng(seed);
  ImageBuffer img = ImageBuffer::zeros(w, h, c);
  for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data[i] = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("sha256 matches FIPS vectors") {
  CHECK(sha256_hex(std::string("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  std::string million(1000000, 'a');
  CHECK(sha256_hex(million) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("rng is deterministic and fork is draw-independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng c(42);
  (void)c.uniform();
  CHECK(c.fork(7).uniform() == Rng(42).fork(7).uniform());
}

TEST_CASE("ppm load scales 8-bit values by 255") {
  fs::path p = temp_dir() / "two_pixel.ppm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "P6\n2 1\n255\n";
    unsigned char bytes[6] = {255, 0, 0, 0, 0, 0};
    out.write(reinterpret_cast<char*>(bytes), 6);
  }
  ImageBuffer img = load_image(p);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.channels == 3);
  CHECK(img.data[0] == doctest::Approx(1.0));
  CHECK(img.data[1] == doctest::Approx(0.0));
  CHECK(img.data[3] == doctest::Approx(0.0));
}

TEST_CASE("missing file raises IoError, junk raises FormatError") {
  CHECK_THROWS_AS(load_image(temp_dir() / "does_not_exist.png"), IoError);
  fs::path junk = temp_dir() / "junk.png";
  std::ofstream(junk, std::ios::binary) << "ZZnot an image at all";
  CHECK_THROWS_AS(load_image(junk), FormatError);
}

TEST_CASE("png round trip preserves 8-bit data, masks load as binary") {
  ImageBuffer img = random_image(23, 17, 3, 1);
  // Quantize to the 8-bit grid first so the round trip is exact.
  for (Eigen::Index i = 0; i < img.data.size(); ++i)
    img.data[i] = std::round(img.data[i] * 255.0) / 255.0;
  fs::path p = temp_dir() / "rt.png";
  save_png(img, p);
  ImageBuffer back = load_image(p);
  REQUIRE(back.width == img.width);
  REQUIRE(back.channels == 3);
  CHECK((back.data - img.data).abs().maxCoeff() < 1e-9);

  GroundTruthMask mask = GroundTruthMask::zeros(23, 17);
  mask.set(5, 6, 1);
  mask.set(0, 0, 1);
  fs::path mp = temp_dir() / "mask.png";
  save_mask_png(mask, mp);
  GroundTruthMask mback = load_mask_png(mp);
  REQUIRE(mback.width == 23);
  CHECK(mback.ones() == 2);
  CHECK(mback.at(5, 6) == 1);
}

TEST_CASE("16-bit png scales by 65535") {
  // Hand-roll a 1x1 16-bit grayscale PNG via libpng? Simpler: a 16-bit PPM.
  fs::path p = temp_dir() / "deep.ppm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "P6\n1 1\n65535\n";
    unsigned char bytes[6] = {0xff, 0xff, 0x80, 0x00, 0x00, 0x01};
    out.write(reinterpret_cast<char*>(bytes), 6);
  }
  ImageBuffer img = load_image(p);
  CHECK(img.data[0] == doctest::Approx(1.0));
  CHECK(img.data[1] == doctest::Approx(32768.0 / 65535.0));
  CHECK(img.data[2] == doctest::Approx(1.0 / 65535.0));
}

TEST_CASE("grayscale conversion uses BT.601 and is idempotent") {
  ImageBuffer img = ImageBuffer::zeros(2, 1, 3);
  img.at(0, 0, 0) = 1.0;  // pure red
  img.at(0, 1, 0) = 1.0;
  img.at(0, 1, 1) = 1.0;
  img.at(0, 1, 2) = 1.0;
  ImageBuffer gray = to_grayscale(img);
  REQUIRE(gray.channels == 1);
  CHECK(gray.at(0, 0, 0) == doctest::Approx(0.299));
  CHECK(gray.at(0, 1, 0) == doctest::Approx(1.0));
  ImageBuffer again = to_grayscale(gray);
  CHECK((again.data - gray.data).abs().maxCoeff() == 0.0);
}

TEST_CASE("extract_patches grid and edge anchoring") {
  ImageBuffer img = random_image(128, 128, 1, 2);
  auto patches = extract_patches(img, 64, 32);
  CHECK(patches.size() == 9);

  ImageBuffer wide = random_image(100, 64, 1, 3);
  auto wp = extract_patches(wide, 64, 32);
  REQUIRE(wp.size() == 3);
  CHECK(wp[0].x0 == 0);
  CHECK(wp[1].x0 == 32);
  CHECK(wp[2].x0 == 36);
  for (const auto& p : wp) CHECK(p.y0 == 0);

  ImageBuffer tiny = random_image(32, 32, 1, 4);
  CHECK_THROWS_AS(extract_patches(tiny, 64, 32), ArgumentError);
}

TEST_CASE("patch coverage is complete for odd sizes") {
  ImageBuffer img = random_image(70, 53, 1, 5);
  auto patches = extract_patches(img, 16, 11);
  std::vector<int> covered(70 * 53, 0);
  for (const auto& p : patches)
    for (int y = p.y0; y < p.y0 + p.size; ++y)
      for (int x = p.x0; x < p.x0 + p.size; ++x) covered[std::size_t(y) * 70 + x] = 1;
  for (int v : covered) CHECK(v == 1);
}

TEST_CASE("label_patches thresholds tamper fraction") {
  ImageBuffer img = random_image(64, 64, 1, 6);
  GroundTruthMask empty = GroundTruthMask::zeros(64, 64);
  auto patches = extract_patches(img, 64, 64);
  REQUIRE(patches.size() == 1);

  label_patches(patches, empty);
  CHECK(patches[0].label == PatchLabel::authentic);
  CHECK(patches[0].tamper_fraction == 0.0);

  GroundTruthMask full = GroundTruthMask::zeros(64, 64);
  for (auto& b : full.bits) b = 1;
  label_patches(patches, full);
  CHECK(patches[0].label == PatchLabel::tampered);
  CHECK(patches[0].tamper_fraction == 1.0);

  // 5% tampered with a 10% threshold lands in the unlabeled buffer.
  GroundTruthMask some = GroundTruthMask::zeros(64, 64);
  int want = int(0.05 * 64 * 64);
  for (int i = 0; i < want; ++i) some.bits[std::size_t(i)] = 1;
  label_patches(patches, some, 0.10);
  CHECK(patches[0].label == PatchLabel::unlabeled);

  GroundTruthMask small = GroundTruthMask::zeros(10, 10);
  CHECK_THROWS_AS(label_patches(patches, small), ArgumentError);
}

TEST_CASE("augment: identity, flip, determinism, bounds") {
  Patch patch;
  patch.size = 32;
  patch.pixels = random_image(32, 32, 3, 7);

  AugmentConfig off;
  off.flip_probability = off.crop_probability = off.color_probability = 0.0;
  Rng rng(0);
  Patch same = augment(patch, off, rng);
  CHECK((same.pixels.data - patch.pixels.data).abs().maxCoeff() == 0.0);

  // left half 0, right half 1: flip swaps the halves
  Patch halves;
  halves.size = 32;
  halves.pixels = ImageBuffer::zeros(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) halves.pixels.at(y, x, 0) = 1.0;
  AugmentConfig flip_only;
  flip_only.flip_probability = 1.0;
  flip_only.crop_probability = flip_only.color_probability = 0.0;
  Rng frng(1);
  Patch flipped = augment(halves, flip_only, frng);
  CHECK(flipped.pixels.at(0, 0, 0) == 1.0);
  CHECK(flipped.pixels.at(0, 31, 0) == 0.0);

  AugmentConfig all;
  all.flip_probability = all.crop_probability = all.color_probability = 1.0;
  Rng r1(99), r2(99);
  Patch a = augment(patch, all, r1);
  Patch b = augment(patch, all, r2);
  CHECK((a.pixels.data - b.pixels.data).abs().maxCoeff() == 0.0);
  CHECK(a.pixels.width == 32);
  CHECK(a.pixels.height == 32);
  CHECK(a.pixels.data.minCoeff() >= 0.0);
  CHECK(a.pixels.data.maxCoeff() <= 1.0);
}

TEST_CASE("augment preserves range and dims under many seeds") {
  Patch patch;
  patch.size = 24;
  patch.pixels = random_image(24, 24, 3, 8);
  AugmentConfig all;
  all.flip_probability = all.crop_probability = all.color_probability = 0.7;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    Patch out = augment(patch, all, rng);
    CHECK(out.pixels.width == 24);
    CHECK(out.pixels.height == 24);
    CHECK(out.pixels.data.minCoeff() >= 0.0);
    CHECK(out.pixels.data.maxCoeff() <= 1.0);
  }
}
