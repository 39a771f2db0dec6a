#include "rsf/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "rsf/error.hpp"

namespace rsf {

namespace {

struct ReadState {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t offset = 0;
  char message[256] = {};
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
  auto* st = static_cast<ReadState*>(png_get_io_ptr(png));
  if (st->offset + count > st->size) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, st->data + st->offset, count);
  st->offset += count;
}

void error_callback(png_structp png, png_const_charp msg) {
  auto* st = static_cast<ReadState*>(png_get_error_ptr(png));
  std::snprintf(st->message, sizeof(st->message), "%s", msg);
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

struct RawImage {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, 1 or 2 bytes per sample (native endian)
};

// Kept free of objects with non-trivial destructors between setjmp and any
// longjmp, as libpng's error model requires.
bool decode_raw(ReadState& st, RawImage& img, std::vector<png_bytep>& rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, error_callback, warning_callback);
  if (!png) {
    std::snprintf(st.message, sizeof(st.message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(st.message, sizeof(st.message), "out of memory");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &st, read_callback);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  if (png_get_channels(png, info) != 3 || (img.bit_depth != 8 && img.bit_depth != 16)) {
    std::snprintf(st.message, sizeof(st.message), "unsupported pixel layout");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  img.pixels.resize(rowbytes * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = img.pixels.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct WriteState {
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
};

void write_callback(png_structp png, png_bytep data, png_size_t count) {
  auto* st = static_cast<WriteState*>(png_get_io_ptr(png));
  st->out->insert(st->out->end(), data, data + count);
}

void flush_callback(png_structp) {}

void write_error_callback(png_structp png, png_const_charp msg) {
  auto* st = static_cast<WriteState*>(png_get_error_ptr(png));
  std::snprintf(st->message, sizeof(st->message), "%s", msg);
  png_longjmp(png, 1);
}

bool encode_raw(WriteState& st, int width, int height, int channels, int bit_depth,
                std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, write_error_callback, warning_callback);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &st, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

ImageTensor decode_png(std::span<const std::uint8_t> bytes) {
  ReadState st;
  st.data = bytes.data();
  st.size = bytes.size();
  RawImage raw;
  std::vector<png_bytep> rows;
  if (!decode_raw(st, raw, rows)) {
    throw DecodeError("png decode failed at byte offset " + std::to_string(st.offset) + " of " +
                      std::to_string(st.size) + ": " + st.message);
  }
  ImageTensor img(3, raw.height, raw.width);
  const std::size_t n = img.plane_size();
  if (raw.bit_depth == 8) {
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) img[c * n + i] = raw.pixels[i * 3 + c] / 255.0f;
  } else {
    const auto* px = reinterpret_cast<const std::uint16_t*>(raw.pixels.data());
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) img[c * n + i] = px[i * 3 + c] / 65535.0f;
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const ImageTensor& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidInput("encode_png: bit depth must be 8 or 16");
  if (img.channels() != 1 && img.channels() != 3) {
    throw InvalidInput("encode_png: expected 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  if (img.empty()) throw InvalidInput("encode_png: empty image");
  const int c = img.channels();
  const std::size_t n = img.plane_size();
  const std::size_t bytes_per_sample = bit_depth / 8;
  const float peak = bit_depth == 8 ? 255.0f : 65535.0f;
  std::vector<std::uint8_t> pixels(n * c * bytes_per_sample);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < c; ++k) {
      const float v = std::clamp(img[k * n + i], 0.0f, 1.0f);
      const auto q = static_cast<std::uint32_t>(std::lround(v * peak));
      if (bit_depth == 8) {
        pixels[i * c + k] = static_cast<std::uint8_t>(q);
      } else {
        const auto s = static_cast<std::uint16_t>(q);
        std::memcpy(pixels.data() + (i * c + k) * 2, &s, 2);
      }
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * c * bytes_per_sample;
  for (int y = 0; y < img.height(); ++y) rows[y] = pixels.data() + rowbytes * y;

  std::vector<std::uint8_t> out;
  WriteState st;
  st.out = &out;
  if (!encode_raw(st, img.width(), img.height(), c, bit_depth, rows)) {
    throw InvalidInput(std::string("encode_png failed: ") + st.message);
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ImageTensor read_png(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_png(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth) {
  write_file_bytes(path, encode_png(img, bit_depth));
}

}  // namespace rsf
