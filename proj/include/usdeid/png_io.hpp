#pragma once

#include <png.h>

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"

namespace usdeid::png {

using AnyImage = std::variant<GrayImage, RgbImage>;

inline bool looks_like_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

/// Decode an 8-bit PNG. Colour inputs become RGB, everything else gray;
/// alpha is discarded. 16-bit inputs are rejected.
inline AnyImage read(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::corrupt_file, "PNG header: " + msg);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorKind::unsupported_depth, "16-bit PNG not supported");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto rows = static_cast<int>(image.height);
  const auto cols = static_cast<int>(image.width);
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(image));
  png_color background{0, 0, 0};
  if (!png_image_finish_read(&image, &background, data.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::corrupt_file, "PNG data: " + msg);
  }
  if (color) return RgbImage(rows, cols, std::move(data));
  return GrayImage(rows, cols, std::move(data));
}

template <int C>
std::vector<std::uint8_t> write(const Raster<C>& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.cols());
  image.height = static_cast<png_uint_32>(img.rows());
  image.format = C == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.data().data(), 0, nullptr))
    throw Error(ErrorKind::io_error, std::string("PNG encode: ") + image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.data().data(), 0, nullptr))
    throw Error(ErrorKind::io_error, std::string("PNG encode: ") + image.message);
  out.resize(size);
  return out;
}

}  // namespace usdeid::png
