/* Copyright 2026 The nodulegan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "nodulegan/imgproc/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace nodulegan::imgproc {

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageError("cannot open image " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageError("cannot write image " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageError("short write to " + path.string());
}

// Skips whitespace and '#' comments between PGM header tokens.
std::size_t pgm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos++] - '0');
    if (++digits > 9) throw ImageError("PGM header value too large");
  }
  if (digits == 0) throw ImageError("malformed PGM header");
  return value;
}

GrayImage8 decode_pgm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 2;
  const std::size_t width = pgm_token(bytes, pos);
  const std::size_t height = pgm_token(bytes, pos);
  const std::size_t maxval = pgm_token(bytes, pos);
  if (width == 0 || height == 0) throw ImageError("PGM image has zero extent");
  if (maxval == 0 || maxval > 255) throw ImageError("only 8-bit PGM (maxval <= 255) is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ImageError("malformed PGM header");
  ++pos;
  if (bytes.size() - pos < width * height) throw ImageError("PGM pixel data truncated");
  GrayImage8 image(width, height);
  for (std::size_t i = 0; i < width * height; ++i) {
    const std::size_t v = bytes[pos + i];
    image.pixels[i] = static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  }
  return image;
}

}  // namespace

GrayImage8 decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw ImageError(std::string("PNG decode failed: ") + png.message);
  }
  png.format = PNG_FORMAT_GRAY;
  GrayImage8 image(png.width, png.height);
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw ImageError("PNG decode failed: " + message);
  }
  return image;
}

std::vector<std::uint8_t> encode_png(const GrayImage8& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw ImageError(std::string("PNG encode failed: ") + png.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw ImageError(std::string("PNG encode failed: ") + png.message);
  }
  out.resize(size);
  return out;
}

GrayImage8 read_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  throw ImageError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const GrayImage8& image) {
  write_bytes(path, encode_png(image));
}

void write_pgm(const std::filesystem::path& path, const GrayImage8& image) {
  std::ostringstream header;
  header << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  write_bytes(path, bytes);
}

void write_image(const std::filesystem::path& path, const GrayImage8& image) {
  if (path.extension() == ".pgm") {
    write_pgm(path, image);
  } else {
    write_png(path, image);
  }
}

}  // namespace nodulegan::imgproc
