// Minimal RGB image support: PPM (P6/P3) input, PNG output (zlib-compressed,
// filter 0), and the line/marker rasterization used by the overlay renderer.
#pragma once

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

#include "partgrasp/common.hpp"
#include "partgrasp/errors.hpp"

namespace partgrasp {

struct Color {
  std::uint8_t r = 0, g = 0, b = 0;
};

inline constexpr Color kGreen{40, 200, 40};
inline constexpr Color kRed{220, 50, 50};
inline constexpr Color kBlue{50, 80, 220};
inline constexpr Color kWhite{255, 255, 255};

struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  static ImageRGB filled(int w, int h, Color c) {
    ImageRGB img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<size_t>(w) * h * 3);
    for (size_t i = 0; i < img.pixels.size(); i += 3) {
      img.pixels[i] = c.r;
      img.pixels[i + 1] = c.g;
      img.pixels[i + 2] = c.b;
    }
    return img;
  }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  void set(int x, int y, Color c) {
    if (!in_bounds(x, y)) return;
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }

  Color get(int x, int y) const {
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
};

namespace detail {

inline void skip_ppm_space(const std::string& data, size_t& pos) {
  while (pos < data.size()) {
    if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

inline long read_ppm_int(const std::string& data, size_t& pos) {
  skip_ppm_space(data, pos);
  long v = 0;
  bool any = false;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
    v = v * 10 + (data[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any) throw ParseError("ppm: expected integer");
  return v;
}

}  // namespace detail

inline ImageRGB load_ppm(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '6' && data[1] != '3'))
    throw ParseError(path.string() + ": not a P6/P3 PPM file");
  const bool binary = data[1] == '6';
  size_t pos = 2;
  const long w = detail::read_ppm_int(data, pos);
  const long h = detail::read_ppm_int(data, pos);
  const long maxval = detail::read_ppm_int(data, pos);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw ParseError(path.string() + ": unsupported PPM geometry");
  ImageRGB img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  const size_t n = static_cast<size_t>(w) * h * 3;
  img.pixels.resize(n);
  if (binary) {
    ++pos;  // single whitespace after maxval
    if (data.size() - pos < n) throw ParseError(path.string() + ": truncated pixel data");
    std::memcpy(img.pixels.data(), data.data() + pos, n);
  } else {
    for (size_t i = 0; i < n; ++i)
      img.pixels[i] = static_cast<std::uint8_t>(detail::read_ppm_int(data, pos));
  }
  return img;
}

inline std::string encode_ppm(const ImageRGB& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

inline void save_ppm(const ImageRGB& img, const std::filesystem::path& path) {
  atomic_write_file(path, encode_ppm(img));
}

namespace detail {

inline void png_append_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

inline void png_chunk(std::string& out, const char type[4], const std::string& payload) {
  png_append_u32(out, static_cast<std::uint32_t>(payload.size()));
  const size_t start = out.size();
  out.append(type, 4);
  out += payload;
  const auto crc =
      crc32(0L, reinterpret_cast<const Bytef*>(out.data() + start),
            static_cast<uInt>(out.size() - start));
  png_append_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline std::string encode_png(const ImageRGB& img) {
  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::png_append_u32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::png_append_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB
  detail::png_chunk(out, "IHDR", ihdr);

  std::string raw;
  raw.reserve(static_cast<size_t>(img.height) * (1 + 3 * img.width));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back('\0');  // filter type 0
    raw.append(reinterpret_cast<const char*>(img.pixels.data() +
                                             static_cast<size_t>(y) * img.width * 3),
               static_cast<size_t>(img.width) * 3);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw Error(ErrorCode::Generic, "png: deflate failed");
  compressed.resize(bound);
  detail::png_chunk(out, "IDAT", compressed);
  detail::png_chunk(out, "IEND", "");
  return out;
}

inline void save_png(const ImageRGB& img, const std::filesystem::path& path) {
  atomic_write_file(path, encode_png(img));
}

// ---------------------------------------------------------------------------
// drawing

inline void draw_rect(ImageRGB& img, double x0, double y0, double x1, double y1,
                      Color c, int thickness = 2) {
  const int ix0 = static_cast<int>(std::lround(x0));
  const int iy0 = static_cast<int>(std::lround(y0));
  const int ix1 = static_cast<int>(std::lround(x1));
  const int iy1 = static_cast<int>(std::lround(y1));
  for (int t = 0; t < thickness; ++t) {
    for (int x = ix0; x <= ix1; ++x) {
      img.set(x, iy0 + t, c);
      img.set(x, iy1 - t, c);
    }
    for (int y = iy0; y <= iy1; ++y) {
      img.set(ix0 + t, y, c);
      img.set(ix1 - t, y, c);
    }
  }
}

inline void draw_disc(ImageRGB& img, double cx, double cy, int radius, Color c) {
  const int icx = static_cast<int>(std::lround(cx));
  const int icy = static_cast<int>(std::lround(cy));
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) img.set(icx + dx, icy + dy, c);
}

// 3x5 glyphs for digits, scaled 2x; enough to tag markers with a rank.
inline void draw_number(ImageRGB& img, int x, int y, int value, Color c) {
  static constexpr std::array<std::uint16_t, 10> font = {
      0b111101101101111, 0b010110010010111, 0b111001111100111, 0b111001111001111,
      0b101101111001001, 0b111100111001111, 0b111100111101111, 0b111001001001001,
      0b111101111101111, 0b111101111001111};
  const std::string digits = std::to_string(value);
  int ox = x;
  for (char d : digits) {
    const std::uint16_t glyph = font[d - '0'];
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 3; ++col) {
        if (glyph & (1 << (14 - (row * 3 + col)))) {
          for (int sy = 0; sy < 2; ++sy)
            for (int sx = 0; sx < 2; ++sx)
              img.set(ox + col * 2 + sx, y + row * 2 + sy, c);
        }
      }
    }
    ox += 8;
  }
}

}  // namespace partgrasp
