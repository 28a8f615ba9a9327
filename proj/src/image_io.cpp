#include "splicedet/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace splicedet {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open file: " + path.string());
  return f;
}

// ---------------------------------------------------------------- PNG ----

struct PngReadGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadGuard() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

ImageBuffer load_png(std::FILE* f, const std::filesystem::path& path) {
  PngReadGuard g;
  g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw FormatError("libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw FormatError("libpng init failed");

  // All decode state lives in vectors declared before setjmp so nothing leaks
  // on the longjmp path.
  std::vector<png_bytep> row_ptrs;
  std::vector<std::uint8_t> pixels;
  if (setjmp(png_jmpbuf(g.png)))
    throw FormatError("invalid PNG file: " + path.string());

  png_init_io(g.png, f);
  png_read_info(g.png, g.info);

  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  png_get_IHDR(g.png, g.info, &width, &height, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(g.png);
  if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(g.png, g.info, PNG_INFO_tRNS))
    png_set_strip_alpha(g.png);
  png_read_update_info(g.png, g.info);

  png_get_IHDR(g.png, g.info, &width, &height, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);
  const int channels = png_get_channels(g.png, g.info);
  if (channels != 1 && channels != 3)
    throw FormatError("unsupported PNG channel count: " + std::to_string(channels));

  const std::size_t rowbytes = png_get_rowbytes(g.png, g.info);
  pixels.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = pixels.data() + y * rowbytes;
  png_read_image(g.png, row_ptrs.data());
  png_read_end(g.png, nullptr);

  ImageBuffer img = ImageBuffer::zeros(int(width), int(height), channels);
  if (bit_depth == 16) {
    for (png_uint_32 y = 0; y < height; ++y) {
      const std::uint8_t* row = row_ptrs[y];
      for (std::size_t i = 0; i < std::size_t(width) * channels; ++i) {
        // PNG stores 16-bit samples big-endian.
        unsigned v = (unsigned(row[2 * i]) << 8) | row[2 * i + 1];
        img.data[std::size_t(y) * width * channels + i] = v / 65535.0;
      }
    }
  } else {
    for (png_uint_32 y = 0; y < height; ++y) {
      const std::uint8_t* row = row_ptrs[y];
      for (std::size_t i = 0; i < std::size_t(width) * channels; ++i)
        img.data[std::size_t(y) * width * channels + i] = row[i] / 255.0;
    }
  }
  return img;
}

struct PngWriteGuard {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteGuard() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

void write_png_bytes(const std::vector<std::uint8_t>& bytes, int width, int height,
                     int channels, const std::filesystem::path& path) {
  auto f = open_file(path, "wb");
  PngWriteGuard g;
  g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!g.png) throw IoError("libpng init failed");
  g.info = png_create_info_struct(g.png);
  if (!g.info) throw IoError("libpng init failed");

  std::vector<png_bytep> row_ptrs(height);
  const std::size_t rowbytes = std::size_t(width) * channels;
  for (int y = 0; y < height; ++y)
    row_ptrs[y] = const_cast<png_bytep>(bytes.data() + y * rowbytes);

  if (setjmp(png_jmpbuf(g.png))) throw IoError("PNG write failed: " + path.string());
  png_init_io(g.png, f.get());
  png_set_IHDR(g.png, g.info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  // Pinned settings keep the byte stream reproducible.
  png_set_compression_level(g.png, 6);
  png_set_rows(g.png, g.info, row_ptrs.data());
  png_write_png(g.png, g.info, PNG_TRANSFORM_IDENTITY, nullptr);
}

// --------------------------------------------------------------- JPEG ----

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

ImageBuffer load_jpeg(std::FILE* f, const std::filesystem::path& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;

  std::vector<std::uint8_t> rowbuf;
  ImageBuffer img;
  jpeg_create_decompress(&cinfo);
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError("invalid JPEG file: " + path.string());
  }
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int width = int(cinfo.output_width);
  const int height = int(cinfo.output_height);
  const int channels = cinfo.output_components;
  img = ImageBuffer::zeros(width, height, channels);
  rowbuf.resize(std::size_t(width) * channels);
  JSAMPROW row = rowbuf.data();
  while (cinfo.output_scanline < cinfo.output_height) {
    int y = int(cinfo.output_scanline);
    jpeg_read_scanlines(&cinfo, &row, 1);
    for (std::size_t i = 0; i < rowbuf.size(); ++i)
      img.data[std::size_t(y) * width * channels + i] = rowbuf[i] / 255.0;
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

// ---------------------------------------------------------------- PPM ----

int ppm_next_int(std::istream& in) {
  // Skips whitespace and '#' comments per the netpbm grammar.
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v;
  if (!(in >> v)) throw FormatError("malformed PPM header");
  return v;
}

ImageBuffer load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  char magic[2];
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') throw FormatError("not a P6 PPM");
  int width = ppm_next_int(in);
  int height = ppm_next_int(in);
  int maxval = ppm_next_int(in);
  in.get();  // single whitespace after maxval
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw FormatError("malformed PPM header");

  ImageBuffer img = ImageBuffer::zeros(width, height, 3);
  const std::size_t n = img.pixel_count() * 3;
  if (maxval < 256) {
    std::vector<std::uint8_t> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n));
    if (std::size_t(in.gcount()) != n) throw FormatError("truncated PPM payload");
    for (std::size_t i = 0; i < n; ++i) img.data[i] = double(buf[i]) / maxval;
  } else {
    std::vector<std::uint8_t> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(2 * n));
    if (std::size_t(in.gcount()) != 2 * n) throw FormatError("truncated PPM payload");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned v = (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1];  // big-endian
      img.data[i] = double(v) / maxval;
    }
  }
  return img;
}

std::uint8_t to_byte(double v) {
  return std::uint8_t(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  auto f = open_file(path, "rb");
  std::uint8_t magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2)
    throw FormatError("file too short: " + path.string());
  std::rewind(f.get());

  if (magic[0] == 0x89 && magic[1] == 'P') return load_png(f.get(), path);
  if (magic[0] == 0xff && magic[1] == 0xd8) return load_jpeg(f.get(), path);
  if (magic[0] == 'P' && magic[1] == '6') {
    f.reset();
    return load_ppm(path);
  }
  throw FormatError("unsupported image format: " + path.string());
}

void save_png(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ArgumentError("save_png: channels must be 1 or 3");
  std::vector<std::uint8_t> bytes(img.data.size());
  for (Eigen::Index i = 0; i < img.data.size(); ++i) bytes[i] = to_byte(img.data[i]);
  write_png_bytes(bytes, img.width, img.height, img.channels, path);
}

void save_mask_png(const GroundTruthMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) bytes[i] = mask.bits[i] ? 255 : 0;
  write_png_bytes(bytes, mask.width, mask.height, 1, path);
}

GroundTruthMask load_mask_png(const std::filesystem::path& path) {
  ImageBuffer img = load_image(path);
  if (img.channels != 1) img = to_grayscale(img);
  GroundTruthMask m = GroundTruthMask::zeros(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) m.set(y, x, img.at(y, x, 0) > 0.0 ? 1 : 0);
  return m;
}

void save_ppm(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.channels != 3) throw ArgumentError("save_ppm: requires 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file: " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> bytes(img.data.size());
  for (Eigen::Index i = 0; i < img.data.size(); ++i) bytes[i] = to_byte(img.data[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("PPM write failed: " + path.string());
}

}  // namespace splicedet
