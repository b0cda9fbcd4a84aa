#pragma once

// 8-bit RGB raster with PNG read/write (libpng) and JPEG read (libjpeg).

#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "streetsafe/errors.hpp"

namespace streetsafe {

/// Pixel rectangle [x1, x2) × [y1, y2).
struct PixelRect {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1; }
  int height() const { return y2 - y1; }
  long area() const { return static_cast<long>(width()) * height(); }
  bool contains(int x, int y) const { return x >= x1 && x < x2 && y >= y1 && y < y2; }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {0, 0, 0}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvalidInput("image dimensions must be non-negative");
    data_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
      data_[i] = fill[0];
      data_[i + 1] = fill[1];
      data_[i + 2] = fill[2];
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  std::uint8_t* pixel(int x, int y) { return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const {
    return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }
  Rgb at(int x, int y) const {
    const auto* p = pixel(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = pixel(x, y);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  const std::vector<std::uint8_t>& bytes() const { return data_; }

  void fill(const PixelRect& r, Rgb c) {
    for (int y = r.y1; y < r.y2; ++y)
      for (int x = r.x1; x < r.x2; ++x) set(x, y, c);
  }

  Image crop(const PixelRect& r) const {
    if (r.x1 < 0 || r.y1 < 0 || r.x2 > width_ || r.y2 > height_ || r.x1 > r.x2 || r.y1 > r.y2)
      throw InvalidInput("crop rectangle outside image");
    Image out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y)
      for (int x = 0; x < r.width(); ++x) out.set(x, y, at(r.x1 + x, r.y1 + y));
    return out;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
  return FilePtr(std::fopen(path.c_str(), mode));
}

inline Image read_png(std::FILE* fp, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng: cannot allocate info struct");
  }
  Image img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("cannot decode PNG " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  img = Image(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x) {
      const std::uint8_t* p = buffer.data() + y * rowbytes + x * 3;
      img.set(static_cast<int>(x), static_cast<int>(y), {p[0], p[1], p[2]});
    }
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

inline Image read_jpeg(std::FILE* fp, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> buffer;
  int w = 0, h = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error("cannot decode JPEG " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  w = static_cast<int>(cinfo.output_width);
  h = static_cast<int>(cinfo.output_height);
  buffer.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buffer.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = buffer.data() + (static_cast<std::size_t>(y) * w + x) * 3;
      img.set(x, y, {p[0], p[1], p[2]});
    }
  return img;
}

inline void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

inline void no_flush(png_structp) {}

/// PNG file contents for an 8-bit gray (channels = 1) or RGB buffer.
inline std::string encode_png(int width, int height, int channels, const std::vector<std::uint8_t>& data) {
  std::string out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng: cannot allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("cannot encode PNG");
  }
  png_set_write_fn(png, &out, append_bytes, no_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    auto* row = const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * width * channels);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline void write_png(const std::string& path, int width, int height, int channels,
                      const std::vector<std::uint8_t>& data) {
  const std::string bytes = encode_png(width, height, channels, data);
  auto fp = open_file(path, "wb");
  if (!fp) throw Error("cannot write " + path);
  if (std::fwrite(bytes.data(), 1, bytes.size(), fp.get()) != bytes.size()) throw Error("write failed: " + path);
}

}  // namespace detail

/// Reads a PNG or JPEG file, detected by signature.
inline Image load_image(const std::string& path) {
  auto fp = detail::open_file(path, "rb");
  if (!fp) throw Error("cannot open image " + path);
  unsigned char sig[8] = {};
  const auto n = std::fread(sig, 1, sizeof sig, fp.get());
  std::rewind(fp.get());
  if (n == 8 && png_sig_cmp(sig, 0, 8) == 0) return detail::read_png(fp.get(), path);
  if (n >= 3 && sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return detail::read_jpeg(fp.get(), path);
  throw Error("unsupported image format (expected PNG or JPEG): " + path);
}

inline void save_png(const Image& img, const std::string& path) {
  detail::write_png(path, img.width(), img.height(), 3, img.bytes());
}

inline void save_gray_png(const std::vector<std::uint8_t>& gray, int width, int height, const std::string& path) {
  if (gray.size() != static_cast<std::size_t>(width) * height) throw InvalidInput("gray buffer size mismatch");
  detail::write_png(path, width, height, 1, gray);
}

}  // namespace streetsafe
