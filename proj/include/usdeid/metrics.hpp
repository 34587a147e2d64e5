#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"

namespace usdeid::metrics {

using Color = std::array<std::uint8_t, 3>;

inline constexpr Color default_pred_color{124, 252, 0};
inline constexpr Color default_true_color{255, 0, 252};

inline void require_same_shape(int r1, int c1, int r2, int c2) {
  if (r1 != r2 || c1 != c2) throw Error(ErrorKind::rejected_input, "mask dimensions differ");
}

/// Dice coefficient 2|X & Y| / (|X| + |Y|); two empty masks score 1.
inline double dice_score(const BitMask& pred, const BitMask& truth) {
  require_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols());
  const std::size_t both = intersection_count(pred, truth);
  const std::size_t total = pred.count() + truth.count();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(total);
}

/// Membership of a labelled image is pixel == k.
inline BitMask label_mask(const GrayImage& img, int k) {
  BitMask m(img.rows(), img.cols());
  for (std::size_t i = 0; i < m.size(); ++i) m.set_index(i, img.data()[i] == k);
  return m;
}

inline double dice_score(const GrayImage& pred, const GrayImage& truth, int k = 1) {
  require_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols());
  return dice_score(label_mask(pred, k), label_mask(truth, k));
}

/// Overlay: white where both are set, color1 pred-only, color2 truth-only.
inline RgbImage imshowpair(const BitMask& pred, const BitMask& truth, Color color1 = default_pred_color,
                           Color color2 = default_true_color) {
  require_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols());
  RgbImage out(pred.rows(), pred.cols());
  for (int r = 0; r < pred.rows(); ++r)
    for (int c = 0; c < pred.cols(); ++c) {
      const bool p = pred.at(r, c);
      const bool t = truth.at(r, c);
      Color px{0, 0, 0};
      if (p && t) px = {255, 255, 255};
      else if (p) px = color1;
      else if (t) px = color2;
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = px[static_cast<std::size_t>(ch)];
    }
  return out;
}

/// Pixel value tuple at column x, row y.
template <int C>
std::vector<int> color_select(const Raster<C>& img, int x, int y) {
  if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows())
    throw Error(ErrorKind::rejected_input, "coordinate outside the image");
  std::vector<int> out;
  for (int ch = 0; ch < C; ++ch) out.push_back(img.at(y, x, ch));
  return out;
}

inline std::vector<int> color_select(const std::variant<GrayImage, RgbImage>& img, int x, int y) {
  return std::visit([&](const auto& i) { return color_select(i, x, y); }, img);
}

/// Python-style tuple text: "(0,)" or "(1, 2, 3)".
inline std::string format_tuple(const std::vector<int>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  if (v.size() == 1) out += ",";
  return out + ")";
}

/// Shortest decimal text for a score: 1 -> "1.0", 0.5 -> "0.5".
inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

struct CompressionReport {
  std::uint64_t before_bytes = 0;
  std::uint64_t after_image_bytes = 0;
  std::uint64_t after_meta_bytes = 0;

  std::uint64_t after_bytes() const { return after_image_bytes + after_meta_bytes; }
  double retained() const { return static_cast<double>(after_bytes()) / static_cast<double>(before_bytes); }
  double ratio() const { return 1.0 - retained(); }
};

inline CompressionReport compression_report(std::uint64_t before, std::uint64_t after_image, std::uint64_t after_meta) {
  if (before == 0) throw Error(ErrorKind::rejected_input, "before size must be positive");
  return {before, after_image, after_meta};
}

namespace detail {

inline std::string trim_zero_decimal(std::string s) {
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  return s;
}

}  // namespace detail

/// Decimal (SI) size with at most one fractional digit: "969 MB", "273.8 MB".
/// approximate rounds to a whole unit and prefixes "~".
inline std::string format_size(std::uint64_t bytes, bool approximate = false) {
  static constexpr const char* units[] = {"B", "KB", "MB", "GB", "TB"};
  double v = static_cast<double>(bytes);
  int u = 0;
  while (v >= 1000.0 && u < 4) {
    v /= 1000.0;
    ++u;
  }
  char buf[48];
  if (approximate) {
    std::snprintf(buf, sizeof buf, "~%.0f %s", v, units[u]);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return detail::trim_zero_decimal(buf) + " " + units[u];
}

inline std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

/// Before | Image Data | MetaData | Total | Compression, one data row.
inline std::string render_table(const CompressionReport& r) {
  const std::array<std::string, 5> head{"Before", "Image Data", "MetaData", "Total", "Compression"};
  const std::array<std::string, 5> row{
      format_size(r.before_bytes) + " (100%)", format_size(r.after_image_bytes), format_size(r.after_meta_bytes),
      format_size(r.after_bytes(), true) + " (" + format_percent(r.retained()) + ")", format_percent(r.ratio())};
  std::array<std::size_t, 5> width{};
  for (std::size_t i = 0; i < 5; ++i) width[i] = std::max(head[i].size(), row[i].size());
  auto line = [&](const std::array<std::string, 5>& cells) {
    std::string out;
    for (std::size_t i = 0; i < 5; ++i) {
      if (i) out += " | ";
      out += cells[i] + std::string(width[i] - cells[i].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string rule;
  for (std::size_t i = 0; i < 5; ++i) rule += (i ? "-+-" : "") + std::string(width[i], '-');
  return line(head) + rule + "\n" + line(row);
}

}  // namespace usdeid::metrics
