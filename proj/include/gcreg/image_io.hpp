#pragma once

// PGM (P2/P5) reading and writing, optional grayscale PNG reading.
// Loaded intensities live on [0, 255] whatever the file's maxval.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#ifdef GCREG_WITH_PNG
#include <png.h>

#include <csetjmp>
#endif

#include "gcreg/error.hpp"
#include "gcreg/field.hpp"

namespace gcreg {

/// CorruptFile / UnsupportedFormat error that knows where decoding stopped.
class FormatError : public Error {
 public:
  FormatError(ErrorKind kind, const std::string& what, std::size_t offset)
      : Error(kind, what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

class PnmCursor {
 public:
  PnmCursor(std::string_view bytes, std::size_t start) : b_(bytes), pos_(start) {}

  std::size_t pos() const noexcept { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const unsigned char c = static_cast<unsigned char>(b_[pos_]);
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1'000'000'000L) throw FormatError(ErrorKind::CorruptFile, std::string(what) + " out of range", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(ErrorKind::CorruptFile, std::string("expected ") + what, start);
    return v;
  }

  // The single whitespace byte separating the header from P5 raster data.
  void expect_one_space() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      throw FormatError(ErrorKind::CorruptFile, "expected whitespace after maxval", pos_);
    ++pos_;
  }

  std::string_view rest() const { return b_.substr(pos_); }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

inline bool has_png_signature(std::string_view bytes) {
  static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8) return false;
  return std::equal(sig, sig + 8, bytes.begin(), [](unsigned char a, char b) { return a == static_cast<unsigned char>(b); });
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Decodes an in-memory PGM. Values are rescaled by 255 / maxval.
inline ScalarField decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw FormatError(ErrorKind::UnsupportedFormat, "not a P2/P5 PGM", 0);
  const bool binary = bytes[1] == '5';
  detail::PnmCursor cur(bytes, 2);

  const long w = cur.read_uint("width");
  const long h = cur.read_uint("height");
  cur.skip_space_and_comments();
  const std::size_t maxval_at = cur.pos();
  const long maxval = cur.read_uint("maxval");
  if (w < 1 || h < 1) throw FormatError(ErrorKind::CorruptFile, "empty image", 2);
  if (maxval < 1 || maxval > 65535) throw FormatError(ErrorKind::CorruptFile, "maxval must be in [1, 65535]", maxval_at);

  ScalarField f(static_cast<int>(w), static_cast<int>(h));
  const double scale = 255.0 / static_cast<double>(maxval);
  const std::size_t n = f.size();

  if (binary) {
    cur.expect_one_space();
    const std::size_t data_at = cur.pos();
    const std::string_view data = cur.rest();
    const std::size_t bpp = maxval > 255 ? 2 : 1;
    if (data.size() < n * bpp)
      throw FormatError(ErrorKind::CorruptFile, "truncated raster", data_at + data.size());
    for (std::size_t k = 0; k < n; ++k) {
      long v = static_cast<unsigned char>(data[k * bpp]);
      if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(data[k * bpp + 1]);
      if (v > maxval) throw FormatError(ErrorKind::CorruptFile, "sample exceeds maxval", data_at + k * bpp);
      f[k] = maxval == 255 ? static_cast<double>(v) : v * scale;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      cur.skip_space_and_comments();
      const std::size_t at = cur.pos();
      const long v = cur.read_uint("sample");
      if (v > maxval) throw FormatError(ErrorKind::CorruptFile, "sample exceeds maxval", at);
      f[k] = maxval == 255 ? static_cast<double>(v) : v * scale;
    }
  }
  return f;
}

#ifdef GCREG_WITH_PNG
/// Grayscale PNG (1-16 bit) from file. 16-bit samples are scaled by 255/65535.
inline ScalarField load_png(const std::filesystem::path& path) {
  std::FILE* fp = std::fopen(path.string().c_str(), "rb");
  if (!fp) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw Error(ErrorKind::IoFailure, "libpng initialisation failed");
  }
  std::vector<png_byte> raster;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    const long at = std::ftell(fp);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError(ErrorKind::CorruptFile, "invalid PNG stream", at < 0 ? 0 : static_cast<std::size_t>(at));
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError(ErrorKind::UnsupportedFormat, "only grayscale PNG is supported", 25);
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raster.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 j = 0; j < h; ++j) rows[j] = raster.data() + j * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  ScalarField f(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 j = 0; j < h; ++j)
    for (png_uint_32 i = 0; i < w; ++i) {
      const png_bytep p = rows[j];
      f(static_cast<int>(i), static_cast<int>(j)) =
          depth == 16 ? ((p[2 * i] << 8) | p[2 * i + 1]) * (255.0 / 65535.0) : static_cast<double>(p[i]);
    }
  return f;
}
#endif

/// PGM or (when built with PNG support) PNG, detected from the file signature.
inline ScalarField load_image(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
#ifdef GCREG_WITH_PNG
  if (detail::has_png_signature(bytes)) return load_png(path);
#else
  if (detail::has_png_signature(bytes))
    throw FormatError(ErrorKind::UnsupportedFormat, "PNG support was not compiled in", 0);
#endif
  return decode_pgm(bytes);
}

/// 8-bit PGM bytes; values are rounded and clamped to [0, 255].
inline std::string encode_pgm(const ScalarField& f, bool binary = true) {
  std::string out = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(f.width()) + " " +
                    std::to_string(f.height()) + "\n255\n";
  auto quantize = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 255.0))); };
  if (binary) {
    out.reserve(out.size() + f.size());
    for (double v : f.values()) out.push_back(static_cast<char>(quantize(v)));
  } else {
    for (int j = 0; j < f.height(); ++j) {
      for (int i = 0; i < f.width(); ++i) {
        out += std::to_string(quantize(f(i, j)));
        out += i + 1 < f.width() ? ' ' : '\n';
      }
    }
  }
  return out;
}

inline void save_pgm(const std::filesystem::path& path, const ScalarField& f, bool binary = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  const std::string bytes = encode_pgm(f, binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "short write to " + path.string());
}

}  // namespace gcreg
