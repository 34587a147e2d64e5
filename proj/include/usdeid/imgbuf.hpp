#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "usdeid/error.hpp"

namespace usdeid {

/// Axis-aligned box in pixel coordinates, top-left origin, y down.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }   // exclusive
  int bottom() const { return y + h; }  // exclusive
  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(int px, int py) const { return px >= x && px < right() && py >= y && py < bottom(); }
  bool fits(int rows, int cols) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && right() <= cols && bottom() <= rows;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Smallest box covering both.
inline BoundingBox box_union(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  const int x1 = std::max(a.right(), b.right());
  const int y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

/// Row-major 8-bit raster with interleaved channels.
template <int Channels>
class Raster {
  static_assert(Channels == 1 || Channels == 3, "gray or RGB only");

 public:
  static constexpr int channels = Channels;

  Raster(int rows, int cols, std::uint8_t fill = 0) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols * Channels, fill);
  }

  Raster(int rows, int cols, std::vector<std::uint8_t> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols * Channels)
      throw Error(ErrorKind::rejected_input, "raster data length does not match rows x cols");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(rows_) * cols_; }

  std::uint8_t& at(int r, int c, int ch = 0) {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * Channels + ch];
  }
  std::uint8_t at(int r, int c, int ch = 0) const {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * Channels + ch];
  }

  std::span<std::uint8_t> pixel(int r, int c) {
    return {data_.data() + (static_cast<std::size_t>(r) * cols_ + c) * Channels, Channels};
  }
  std::span<const std::uint8_t> pixel(int r, int c) const {
    return {data_.data() + (static_cast<std::size_t>(r) * cols_ + c) * Channels, Channels};
  }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }
  BoundingBox bounds() const { return {0, 0, cols_, rows_}; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static void check_dims(int rows, int cols) {
    if (rows < 1 || cols < 1) throw Error(ErrorKind::rejected_input, "raster must be at least 1x1");
  }

  int rows_;
  int cols_;
  std::vector<std::uint8_t> data_;
};

using GrayImage = Raster<1>;
using RgbImage = Raster<3>;

/// Binary per-pixel mask; one byte per pixel holding 0 or 1.
class BitMask {
 public:
  BitMask(int rows, int cols, bool fill = false) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw Error(ErrorKind::rejected_input, "mask must be at least 1x1");
    bits_.assign(static_cast<std::size_t>(rows) * cols, fill ? 1 : 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
  void set(int r, int c, bool v = true) { bits_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0; }
  bool get_or(int r, int c, bool outside) const {
    if (r < 0 || c < 0 || r >= rows_ || c >= cols_) return outside;
    return at(r, c);
  }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set_index(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  bool empty() const { return std::find(bits_.begin(), bits_.end(), std::uint8_t{1}) == bits_.end(); }
  bool same_shape(const BitMask& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const BitMask&, const BitMask&) = default;

 private:
  int rows_;
  int cols_;
  std::vector<std::uint8_t> bits_;
};

inline std::size_t intersection_count(const BitMask& a, const BitMask& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::dimension_mismatch, "mask shapes differ");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
  return n;
}

inline bool is_subset(const BitMask& a, const BitMask& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::dimension_mismatch, "mask shapes differ");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

/// Tight bounds of the set pixels; a zero-sized box when the mask is empty.
inline BoundingBox mask_bounds(const BitMask& m) {
  int x0 = m.cols(), y0 = m.rows(), x1 = -1, y1 = -1;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      if (m.at(r, c)) {
        x0 = std::min(x0, c);
        x1 = std::max(x1, c);
        y0 = std::min(y0, r);
        y1 = std::max(y1, r);
      }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// ITU-R 601 luma, rounded half away from zero.
inline std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  return static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
}

inline GrayImage to_gray(const RgbImage& img) {
  GrayImage out(img.rows(), img.cols());
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c) out.at(r, c) = luma(img.at(r, c, 0), img.at(r, c, 1), img.at(r, c, 2));
  return out;
}

inline GrayImage to_gray(const GrayImage& img) { return img; }

template <int C>
Raster<C> crop(const Raster<C>& img, const BoundingBox& box) {
  if (!box.fits(img.rows(), img.cols())) throw Error(ErrorKind::rejected_input, "crop box outside image");
  Raster<C> out(box.h, box.w);
  for (int r = 0; r < box.h; ++r) {
    auto src = img.pixel(box.y + r, box.x);
    std::copy_n(src.data(), static_cast<std::size_t>(box.w) * C, out.pixel(r, 0).data());
  }
  return out;
}

inline BitMask crop(const BitMask& m, const BoundingBox& box) {
  if (!box.fits(m.rows(), m.cols())) throw Error(ErrorKind::rejected_input, "crop box outside mask");
  BitMask out(box.h, box.w);
  for (int r = 0; r < box.h; ++r)
    for (int c = 0; c < box.w; ++c) out.set(r, c, m.at(box.y + r, box.x + c));
  return out;
}

template <int C>
Raster<C> fill_box(Raster<C> img, const BoundingBox& box, std::uint8_t value) {
  if (!box.fits(img.rows(), img.cols())) throw Error(ErrorKind::rejected_input, "fill box outside image");
  for (int r = box.y; r < box.bottom(); ++r) {
    auto row = img.pixel(r, box.x);
    std::fill_n(row.data(), static_cast<std::size_t>(box.w) * C, value);
  }
  return img;
}

/// Zero every pixel whose mask bit is clear.
template <int C>
Raster<C> zero_outside(Raster<C> img, const BitMask& keep) {
  if (keep.rows() != img.rows() || keep.cols() != img.cols())
    throw Error(ErrorKind::dimension_mismatch, "mask and image shapes differ");
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      if (!keep.at(r, c))
        for (auto& v : img.pixel(r, c)) v = 0;
  return img;
}

/// N frames sharing rows, cols and channel count.
class FrameStack {
 public:
  using GrayFrames = std::vector<GrayImage>;
  using RgbFrames = std::vector<RgbImage>;

  FrameStack(std::string source_id, GrayFrames frames) : source_id_(std::move(source_id)), frames_(std::move(frames)) {
    validate();
  }
  FrameStack(std::string source_id, RgbFrames frames) : source_id_(std::move(source_id)), frames_(std::move(frames)) {
    validate();
  }

  const std::string& source_id() const { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

  int channels() const { return std::holds_alternative<GrayFrames>(frames_) ? 1 : 3; }
  std::size_t size() const {
    return std::visit([](const auto& v) { return v.size(); }, frames_);
  }
  int rows() const {
    return std::visit([](const auto& v) { return v.front().rows(); }, frames_);
  }
  int cols() const {
    return std::visit([](const auto& v) { return v.front().cols(); }, frames_);
  }

  GrayImage gray(std::size_t i) const {
    return std::visit([i](const auto& v) { return to_gray(v.at(i)); }, frames_);
  }
  std::vector<GrayImage> gray_frames() const {
    std::vector<GrayImage> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(gray(i));
    return out;
  }

  /// Calls f(std::vector<Raster<C>>&) with the concrete frame vector.
  template <class F>
  decltype(auto) visit(F&& f) {
    return std::visit(std::forward<F>(f), frames_);
  }
  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), frames_);
  }

  /// New stack with f applied to every frame; f may change frame dimensions uniformly.
  template <class F>
  FrameStack map_frames(F&& f) const {
    return std::visit(
        [&](const auto& v) {
          using Img = typename std::decay_t<decltype(v)>::value_type;
          std::vector<Img> out;
          out.reserve(v.size());
          for (const auto& img : v) out.push_back(f(img));
          return FrameStack(source_id_, std::move(out));
        },
        frames_);
  }

  std::size_t raw_bytes() const { return size() * static_cast<std::size_t>(rows()) * cols() * channels(); }

  friend bool operator==(const FrameStack&, const FrameStack&) = default;

 private:
  void validate() const {
    std::visit(
        [](const auto& v) {
          if (v.empty()) throw Error(ErrorKind::rejected_input, "frame stack needs at least one frame");
          for (const auto& f : v)
            if (f.rows() != v.front().rows() || f.cols() != v.front().cols())
              throw Error(ErrorKind::dimension_mismatch, "frames differ in size");
        },
        frames_);
  }

  std::string source_id_;
  std::variant<GrayFrames, RgbFrames> frames_;
};

/// Per-pixel maximum over all frames of the gray rendering.
inline GrayImage max_projection(const FrameStack& stack) {
  GrayImage out = stack.gray(0);
  for (std::size_t f = 1; f < stack.size(); ++f) {
    const GrayImage g = stack.gray(f);
    auto dst = out.data();
    auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
  }
  return out;
}

/// Mask as a 0/255 image, handy for writing masks to disk.
inline GrayImage mask_to_image(const BitMask& m, std::uint8_t on = 255) {
  GrayImage out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = m[i] ? on : 0;
  return out;
}

}  // namespace usdeid
