#pragma once

#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"

namespace usdeid::pnm {

using AnyImage = std::variant<GrayImage, RgbImage>;

namespace detail {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Whitespace and '#' comments may separate header tokens.
  long number() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw Error(ErrorKind::corrupt_file, "malformed PNM header");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000) throw Error(ErrorKind::corrupt_file, "PNM header value out of range");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw Error(ErrorKind::corrupt_file, "malformed PNM header");
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace detail

inline bool looks_like_pnm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

/// Binary P5 (gray) or P6 (RGB), maxval 255.
inline AnyImage read(std::span<const std::uint8_t> bytes) {
  if (!looks_like_pnm(bytes)) throw Error(ErrorKind::corrupt_file, "not a binary PGM/PPM");
  const int channels = bytes[1] == '5' ? 1 : 3;
  detail::HeaderReader hdr(bytes);
  const long cols = hdr.number();
  const long rows = hdr.number();
  const long maxval = hdr.number();
  if (cols < 1 || rows < 1) throw Error(ErrorKind::corrupt_file, "PNM dimensions must be positive");
  if (maxval != 255) throw Error(ErrorKind::unsupported_depth, "only maxval 255 is supported");
  const std::size_t start = hdr.raster_start();
  const std::size_t need = static_cast<std::size_t>(rows) * cols * channels;
  if (bytes.size() < start || bytes.size() - start < need) throw Error(ErrorKind::corrupt_file, "PNM raster truncated");
  std::vector<std::uint8_t> data(bytes.begin() + start, bytes.begin() + start + need);
  if (channels == 1) return GrayImage(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
  return RgbImage(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
}

inline GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  AnyImage img = read(bytes);
  if (auto* g = std::get_if<GrayImage>(&img)) return std::move(*g);
  throw Error(ErrorKind::unsupported, "expected a P5 graymap");
}

template <int C>
std::vector<std::uint8_t> write(const Raster<C>& img) {
  const std::string header = std::string(C == 1 ? "P5" : "P6") + "\n" + std::to_string(img.cols()) + " " +
                             std::to_string(img.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data().begin(), img.data().end());
  return out;
}

}  // namespace usdeid::pnm
