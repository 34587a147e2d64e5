#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "usdeid/components.hpp"
#include "usdeid/ctc.hpp"
#include "usdeid/font5x7.hpp"
#include "usdeid/imgbuf.hpp"

namespace usdeid::textmask {

struct OverlayConfig {
  double var_eps = 2.0;          // intensity^2
  int background_threshold = 0;  // same knob as the ROI threshold
  int bright_margin = 40;

  int bright_thresh() const { return background_threshold + bright_margin; }
};

/// Candidate overlay pixels: static across frames and brighter than the
/// background. Single frames fall back to brightness alone.
inline BitMask static_overlay_map(const FrameStack& stack, const OverlayConfig& cfg = {}) {
  const auto frames = stack.gray_frames();
  const int rows = stack.rows();
  const int cols = stack.cols();
  const std::size_t n = frames.size();
  BitMask out(rows, cols);
  std::vector<int> samples(n);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
      samples[f] = frames[f].data()[i];
      sum += samples[f];
    }
    if (n == 1) {
      out.set_index(i, samples[0] > cfg.bright_thresh());
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (int v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var >= cfg.var_eps) continue;
    std::sort(samples.begin(), samples.end());
    const double median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    out.set_index(i, median > cfg.bright_thresh());
  }
  return out;
}

struct DetectConfig {
  int min_height = 3;
  int max_height = 64;
  std::size_t min_area = 4;
  double min_vertical_overlap = 0.5;  // fraction of the shorter extent
  double gap_factor = 1.5;            // times the median glyph height
};

namespace detail {

inline int interval_gap(int a0, int a1, int b0, int b1) { return std::max(0, std::max(a0, b0) - std::min(a1, b1)); }

inline double vertical_overlap(const BoundingBox& a, const BoundingBox& b) {
  const int overlap = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return overlap <= 0 ? 0.0 : static_cast<double>(overlap) / std::min(a.h, b.h);
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Group glyph-sized components into text-line boxes.
///
/// Components 3..64 px tall with at least 4 px are glyph candidates. Two
/// candidates join the same line when their vertical extents overlap by half
/// the shorter one and their horizontal gap is under 1.5 median glyph
/// heights. Sub-glyph specks next to a line (an i-dot, a hyphen, a colon)
/// are then folded into it so the box covers every lit pixel of the line.
inline std::vector<BoundingBox> detect_text_boxes(const BitMask& overlay, const DetectConfig& cfg = {}) {
  const Labeling lab = label_components(overlay, 8);
  std::vector<BoundingBox> glyphs;
  std::vector<BoundingBox> specks;
  for (const auto& c : lab.components) {
    if (c.box.h > cfg.max_height) continue;
    if (c.box.h >= cfg.min_height && c.area >= cfg.min_area) {
      glyphs.push_back(c.box);
    } else {
      specks.push_back(c.box);
    }
  }
  if (glyphs.empty()) return {};

  std::vector<int> heights;
  for (const auto& g : glyphs) heights.push_back(g.h);
  std::nth_element(heights.begin(), heights.begin() + heights.size() / 2, heights.end());
  const double median_h = heights[heights.size() / 2];
  const double max_gap = cfg.gap_factor * median_h;

  detail::DisjointSets sets(glyphs.size());
  for (std::size_t i = 0; i < glyphs.size(); ++i) {
    for (std::size_t j = i + 1; j < glyphs.size(); ++j) {
      const auto& a = glyphs[i];
      const auto& b = glyphs[j];
      if (detail::vertical_overlap(a, b) < cfg.min_vertical_overlap) continue;
      if (detail::interval_gap(a.x, a.right(), b.x, b.right()) >= max_gap) continue;
      sets.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }

  std::vector<BoundingBox> lines;
  std::vector<int> line_of(glyphs.size(), -1);
  for (std::size_t i = 0; i < glyphs.size(); ++i) {
    const int root = sets.find(static_cast<int>(i));
    if (line_of[root] < 0) {
      line_of[root] = static_cast<int>(lines.size());
      lines.push_back(glyphs[i]);
    } else {
      auto& box = lines[line_of[root]];
      box = box_union(box, glyphs[i]);
    }
  }

  const double max_vgap = 0.5 * median_h;
  std::vector<bool> absorbed(specks.size(), false);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < specks.size(); ++s) {
      if (absorbed[s]) continue;
      for (auto& line : lines) {
        const auto& sp = specks[s];
        if (detail::interval_gap(sp.x, sp.right(), line.x, line.right()) >= max_gap) continue;
        if (detail::interval_gap(sp.y, sp.bottom(), line.y, line.bottom()) >= max_vgap) continue;
        line = box_union(line, sp);
        absorbed[s] = true;
        changed = true;
        break;
      }
    }
  }

  // An absorbed speck can close the gap between two lines ("DR. LEE").
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < lines.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < lines.size() && !merged; ++j) {
        if (detail::vertical_overlap(lines[i], lines[j]) < cfg.min_vertical_overlap) continue;
        if (detail::interval_gap(lines[i].x, lines[i].right(), lines[j].x, lines[j].right()) >= max_gap) continue;
        lines[i] = box_union(lines[i], lines[j]);
        lines.erase(lines.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
  }

  std::sort(lines.begin(), lines.end(), [](const BoundingBox& a, const BoundingBox& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return lines;
}

struct Recognition {
  std::string text;
  double confidence = 0.0;
};

/// Seam for text recognizers. Implementations must be deterministic; those
/// that are not safe for concurrent calls report it and get serialized.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual Recognition run(const GrayImage& crop) const = 0;
  virtual bool concurrent_safe() const { return true; }

  std::mutex& serial_lock() const { return lock_; }

 private:
  mutable std::mutex lock_;
};

/// Matches each glyph cell of a line against the 5x7 font by normalized
/// cross-correlation. Searches integer scales and the cell-grid phase; the
/// winning layout is the one with no ink in inter-glyph gap columns and the
/// highest mean correlation.
class TemplateRecognizer : public Recognizer {
 public:
  Recognition run(const GrayImage& crop) const override {
    int maxv = 0;
    for (auto v : crop.data()) maxv = std::max<int>(maxv, v);
    if (maxv < 32) return {};
    BitMask ink(crop.rows(), crop.cols());
    for (std::size_t i = 0; i < ink.size(); ++i) ink.set_index(i, crop.data()[i] * 2 > maxv);
    const BoundingBox tight = mask_bounds(ink);

    const int s_min = std::max(1, (tight.h + font::glyph_height - 1) / font::glyph_height);
    const int s_max = std::min(8, std::max(s_min, tight.h / 3));
    Layout best;
    for (int s = s_min; s <= s_max; ++s) {
      const int cell_h = font::glyph_height * s;
      for (int dy = 0; dy <= cell_h - tight.h; ++dy) {
        for (int dx = 0; dx < font::glyph_width * s; ++dx) {
          Layout cand = read_layout(ink, tight, s, tight.x - dx, tight.y - dy);
          if (cand.better_than(best)) best = std::move(cand);
        }
      }
    }
    if (!best.valid) return {};
    return {best.text, std::clamp(best.mean_score, 0.0, 1.0)};
  }

  /// NCC between a sampled 5x7 cell and a glyph; 0 when either is constant.
  static double correlation(const std::array<bool, 35>& cell, const font::Glyph& g) {
    double ma = 0, mb = 0;
    for (int r = 0; r < font::glyph_height; ++r)
      for (int c = 0; c < font::glyph_width; ++c) {
        ma += cell[r * 5 + c];
        mb += font::lit(g, r, c);
      }
    ma /= 35.0;
    mb /= 35.0;
    double cov = 0, va = 0, vb = 0;
    for (int r = 0; r < font::glyph_height; ++r)
      for (int c = 0; c < font::glyph_width; ++c) {
        const double a = cell[r * 5 + c] - ma;
        const double b = font::lit(g, r, c) - mb;
        cov += a * b;
        va += a * a;
        vb += b * b;
      }
    if (va == 0 || vb == 0) return 0.0;
    return cov / std::sqrt(va * vb);
  }

 private:
  struct Layout {
    bool valid = false;
    std::size_t violations = 0;
    double mean_score = 0.0;
    std::string text;

    bool better_than(const Layout& o) const {
      if (!o.valid) return valid;
      if (violations != o.violations) return violations < o.violations;
      return mean_score > o.mean_score + 1e-12;
    }
  };

  static Layout read_layout(const BitMask& ink, const BoundingBox& tight, int s, int x0, int y0) {
    const int pitch = font::advance * s;
    const int cells = (tight.right() - x0 + pitch - 1) / pitch;
    Layout out;
    out.valid = true;
    // Ink that falls in a gap column or past the glyph rows cannot belong to any cell.
    for (int r = tight.y; r < tight.bottom(); ++r)
      for (int c = tight.x; c < tight.right(); ++c)
        if (ink.at(r, c) && (((c - x0) % pitch) >= font::glyph_width * s || r - y0 >= font::glyph_height * s))
          ++out.violations;

    double total = 0.0;
    int glyphs = 0;
    for (int i = 0; i < cells; ++i) {
      std::array<bool, 35> cell{};
      bool blank = true;
      for (int r = 0; r < font::glyph_height; ++r)
        for (int c = 0; c < font::glyph_width; ++c) {
          int on = 0;
          for (int yy = 0; yy < s; ++yy)
            for (int xx = 0; xx < s; ++xx) on += ink.get_or(y0 + r * s + yy, x0 + i * pitch + c * s + xx, false);
          cell[r * 5 + c] = on * 2 > s * s;
          blank = blank && !cell[r * 5 + c];
        }
      if (blank) {
        out.text.push_back(' ');
        continue;
      }
      double best = -2.0;
      char best_ch = '?';
      for (char ch = font::first_char + 1; ch <= font::last_char; ++ch) {
        const double v = correlation(cell, font::glyph(ch));
        if (v > best) {
          best = v;
          best_ch = ch;
        }
      }
      out.text.push_back(best_ch);
      total += best;
      ++glyphs;
    }
    while (!out.text.empty() && out.text.back() == ' ') out.text.pop_back();
    if (glyphs == 0) {
      out.valid = false;
      return out;
    }
    out.mean_score = total / glyphs;
    return out;
  }
};

/// Adapter for a sequence model that emits per-column label distributions;
/// the text is the best-path CTC decoding and the confidence its path score.
class CtcRecognizer : public Recognizer {
 public:
  using Model = std::function<ctc::ProbMatrix(const GrayImage&)>;

  CtcRecognizer(Model model, ctc::Alphabet alphabet, bool concurrent = true)
      : model_(std::move(model)), alphabet_(std::move(alphabet)), concurrent_(concurrent) {}

  Recognition run(const GrayImage& crop) const override {
    const ctc::ProbMatrix y = model_(crop);
    if (y.width() != alphabet_.width()) throw Error(ErrorKind::rejected_input, "model output width != |L|+1");
    const ctc::Decoded d = ctc::best_path_decode(y);
    return {alphabet_.decode(d.labels), d.score};
  }
  bool concurrent_safe() const override { return concurrent_; }

 private:
  Model model_;
  ctc::Alphabet alphabet_;
  bool concurrent_;
};

/// Best-effort recognition: failures yield empty text with confidence 0.
inline Recognition recognize(const GrayImage& box_img, const Recognizer& rec) {
  try {
    Recognition r;
    if (rec.concurrent_safe()) {
      r = rec.run(box_img);
    } else {
      std::lock_guard lock(rec.serial_lock());
      r = rec.run(box_img);
    }
    if (!std::isfinite(r.confidence)) r.confidence = 0.0;
    r.confidence = std::clamp(r.confidence, 0.0, 1.0);
    return r;
  } catch (...) {
    return {};
  }
}

/// Zero-fill every box in every frame, all channels.
inline FrameStack mask_text(const FrameStack& stack, std::span<const BoundingBox> boxes) {
  return stack.map_frames([&](const auto& frame) {
    auto out = frame;
    for (const auto& b : boxes) out = fill_box(std::move(out), b, 0);
    return out;
  });
}

struct TextRecord {
  std::string source_id;
  std::size_t frame = 0;
  BoundingBox box;
  std::string text;
  double confidence = 0.0;
};

struct TextScan {
  BitMask overlay;
  std::vector<BoundingBox> boxes;
  std::vector<TextRecord> records;
};

/// Detect once per stack and recognize each line from the static content
/// of frame 0 (pixels outside the overlay map are cleared first).
inline TextScan scan_text(const FrameStack& stack, const Recognizer& rec, const OverlayConfig& ocfg = {},
                          const DetectConfig& dcfg = {}) {
  BitMask overlay = static_overlay_map(stack, ocfg);
  std::vector<BoundingBox> boxes = detect_text_boxes(overlay, dcfg);
  GrayImage still = stack.gray(0);
  for (std::size_t i = 0; i < overlay.size(); ++i)
    if (!overlay[i]) still.data()[i] = 0;
  std::vector<TextRecord> records;
  for (const auto& b : boxes) {
    Recognition r = recognize(crop(still, b), rec);
    records.push_back({stack.source_id(), 0, b, std::move(r.text), r.confidence});
  }
  return {std::move(overlay), std::move(boxes), std::move(records)};
}

}  // namespace usdeid::textmask
