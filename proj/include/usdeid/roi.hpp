#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "usdeid/components.hpp"
#include "usdeid/error.hpp"
#include "usdeid/imgbuf.hpp"

// Region-of-interest extraction: smoothing, thresholding, closing and area
// filtering give a morphological ROI; a circle/ray fit on its boundary turns
// that into a wedge, notched wedge or rectangle.

namespace usdeid::roi {

/// Every tunable constant of the ROI stage.
struct RoiConfig {
  int threshold = 0;
  double min_sigma = 1.0;
  double sigma_divisor = 256.0;
  double area_fraction = 0.01;
  double slope_tolerance = 0.05;
  double parallel_tolerance = 1e-6;
  double max_center_diagonals = 2.0;
  double subset_ratio = 0.98;
  double notch_fraction = 0.05;
  std::array<double, 3> sample_fractions{0.15, 0.50, 0.85};
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// --- smoothing ------------------------------------------------------------

struct GaussianKernel {
  double sigma = 1.0;
  int radius = 3;
  std::vector<double> taps;     // 1-D, length 2r+1, sums to 1
  std::vector<double> weights;  // 2-D outer product, (2r+1)^2, row-major

  double weight(int dy, int dx) const {
    const int n = 2 * radius + 1;
    return weights[static_cast<std::size_t>((dy + radius) * n + (dx + radius))];
  }
};

/// Sampled isotropic Gaussian truncated at ceil(3 sigma), normalized to 1.
inline GaussianKernel make_kernel(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::rejected_input, "sigma must be positive");
  GaussianKernel k;
  k.sigma = sigma;
  k.radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int n = 2 * k.radius + 1;
  k.taps.resize(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k.taps[static_cast<std::size_t>(i + k.radius)] = v;
    sum += v;
  }
  for (double& v : k.taps) v /= sum;
  k.weights.resize(static_cast<std::size_t>(n) * n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) k.weights[static_cast<std::size_t>(y * n + x)] = k.taps[y] * k.taps[x];
  return k;
}

/// Kernel width adapts to the frame: sigma = max(1, min(rows, cols) / 256).
inline double adaptive_sigma(int rows, int cols, const RoiConfig& cfg = {}) {
  return std::max(cfg.min_sigma, std::min(rows, cols) / cfg.sigma_divisor);
}

/// Separable convolution with edge replication, rounded back to 8 bits.
inline GrayImage convolve(const GrayImage& img, const GaussianKernel& k) {
  const int rows = img.rows();
  const int cols = img.cols();
  std::vector<double> tmp(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int d = -k.radius; d <= k.radius; ++d)
        acc += k.taps[d + k.radius] * img.at(r, std::clamp(c + d, 0, cols - 1));
      tmp[static_cast<std::size_t>(r) * cols + c] = acc;
    }
  GrayImage out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int d = -k.radius; d <= k.radius; ++d)
        acc += k.taps[d + k.radius] * tmp[static_cast<std::size_t>(std::clamp(r + d, 0, rows - 1)) * cols + c];
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  return out;
}

inline GrayImage gaussian_smooth(const GrayImage& img, const RoiConfig& cfg = {}) {
  return convolve(img, make_kernel(adaptive_sigma(img.rows(), img.cols(), cfg)));
}

/// Strictly-greater threshold: bit set iff pixel > thresh.
inline BitMask threshold(const GrayImage& img, int thresh = 0) {
  if (thresh < 0 || thresh > 255) throw Error(ErrorKind::rejected_input, "threshold must lie in [0, 255]");
  BitMask out(img.rows(), img.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.set_index(i, img.data()[i] > thresh);
  return out;
}

// --- morphology -----------------------------------------------------------

/// Disk structuring element: offsets with dx^2 + dy^2 <= r^2.
struct StructElem {
  int radius = 1;

  std::vector<std::pair<int, int>> offsets() const {
    std::vector<std::pair<int, int>> out;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dx * dx + dy * dy <= radius * radius) out.emplace_back(dy, dx);
    return out;
  }
};

inline int disk_radius_for(double sigma) { return std::max(1, static_cast<int>(std::lround(sigma))); }

/// Closing A . B = (A (+) B) (-) B. Pixels outside the frame are background
/// for A; the dilation is carried into an r-pixel apron so the erosion sees
/// the same set an unbounded plane would, which keeps closing extensive and
/// idempotent at the borders.
inline BitMask close(const BitMask& mask, const StructElem& se) {
  if (se.radius < 1) throw Error(ErrorKind::rejected_input, "structuring element radius must be >= 1");
  const int r = se.radius;
  const int rows = mask.rows() + 2 * r;
  const int cols = mask.cols() + 2 * r;
  const auto offs = se.offsets();
  std::vector<std::uint8_t> dil(static_cast<std::size_t>(rows) * cols, 0);
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x) {
      if (!mask.at(y, x)) continue;
      for (auto [dy, dx] : offs) dil[static_cast<std::size_t>(y + r + dy) * cols + (x + r + dx)] = 1;
    }
  BitMask out(mask.rows(), mask.cols());
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x) {
      bool all = true;
      for (auto [dy, dx] : offs)
        if (!dil[static_cast<std::size_t>(y + r + dy) * cols + (x + r + dx)]) {
          all = false;
          break;
        }
      out.set(y, x, all);
    }
  return out;
}

/// Drop 8-connected components smaller than min_frac of the frame area.
inline BitMask area_filter(const BitMask& mask, double min_frac = 0.01) {
  if (min_frac < 0.0 || min_frac >= 1.0) throw Error(ErrorKind::rejected_input, "min_frac must lie in [0, 1)");
  const double min_area = min_frac * static_cast<double>(mask.size());
  const Labeling lab = label_components(mask, 8);
  BitMask out(mask.rows(), mask.cols());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int id = lab.labels[i];
    if (id >= 0 && static_cast<double>(lab.components[static_cast<std::size_t>(id)].area) >= min_area)
      out.set_index(i, true);
  }
  return out;
}

// --- geometry -------------------------------------------------------------

struct GeomPoints {
  std::array<Point, 3> lower;  // P1, P2, P3 on the lower boundary, left to right
  Point left;                  // Q_L
  Point right;                 // Q_R
  double m12 = 0.0;
  double m23 = 0.0;
};

enum class ShapeKind { wedge, notched_wedge, rect };

inline const char* to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::wedge: return "wedge";
    case ShapeKind::notched_wedge: return "notched-wedge";
    case ShapeKind::rect: return "rect";
  }
  return "?";
}

/// Fitted scan geometry. Sector kinds cover the annulus r_inner..r_outer
/// between two rays; the angular interval runs from theta_right with
/// increasing angle (y-down atan2) to theta_left.
struct RoiShape {
  ShapeKind kind = ShapeKind::rect;
  Point center;
  double r_outer = 0.0;
  double r_inner = 0.0;
  double theta_left = 0.0;
  double theta_right = 0.0;
  double subtended = 0.0;  // acute angle between the two rays
  BoundingBox rect;

  bool is_sector() const { return kind != ShapeKind::rect; }
};

inline double wrap_two_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  return a < 0 ? a + two_pi : a;
}

inline double angular_span(const RoiShape& s) { return wrap_two_pi(s.theta_left - s.theta_right); }

/// Acute angle between two lines given their slopes:
/// |atan((m1 - m2) / (1 + m1 m2))|, pi/2 when perpendicular. Vertical lines
/// take an infinite slope.
inline double acute_angle(double m1, double m2) {
  const bool v1 = std::isinf(m1);
  const bool v2 = std::isinf(m2);
  if (v1 && v2) return 0.0;
  if (v1) return std::numbers::pi / 2 - std::atan(std::abs(m2));
  if (v2) return std::numbers::pi / 2 - std::atan(std::abs(m1));
  const double den = 1.0 + m1 * m2;
  if (den == 0.0) return std::numbers::pi / 2;
  return std::abs(std::atan((m1 - m2) / den));
}

inline double slope(Point a, Point b) {
  const double dx = b.x - a.x;
  if (dx == 0.0) return std::numeric_limits<double>::infinity();
  return (b.y - a.y) / dx;
}

/// Sample the lower boundary at 15/50/85% of the bounding-box width and
/// find the extreme left and right pixels (topmost on ties).
inline GeomPoints pick_geom_points(const BitMask& mask, const RoiConfig& cfg = {}) {
  const BoundingBox b = mask_bounds(mask);
  if (b.w < 1) throw Error(ErrorKind::geometry_degenerate, "empty mask");
  GeomPoints g;
  for (int i = 0; i < 3; ++i) {
    const int x = std::min(b.right() - 1, b.x + static_cast<int>(cfg.sample_fractions[i] * b.w));
    int lowest = -1;
    for (int y = b.bottom() - 1; y >= b.y; --y)
      if (mask.at(y, x)) {
        lowest = y;
        break;
      }
    if (lowest < 0) throw Error(ErrorKind::geometry_degenerate, "sampled column is empty");
    g.lower[i] = {static_cast<double>(x), static_cast<double>(lowest)};
  }
  if (!(g.lower[0].x < g.lower[1].x && g.lower[1].x < g.lower[2].x))
    throw Error(ErrorKind::geometry_degenerate, "mask too narrow for three sample columns");
  for (int y = b.y; y < b.bottom(); ++y)
    if (mask.at(y, b.x)) {
      g.left = {static_cast<double>(b.x), static_cast<double>(y)};
      break;
    }
  for (int y = b.y; y < b.bottom(); ++y)
    if (mask.at(y, b.right() - 1)) {
      g.right = {static_cast<double>(b.right() - 1), static_cast<double>(y)};
      break;
    }
  g.m12 = slope(g.lower[0], g.lower[1]);
  g.m23 = slope(g.lower[1], g.lower[2]);
  return g;
}

/// Intersection of the perpendicular bisectors of chords ab and bc, or
/// nullopt when they are (numerically) parallel.
inline std::optional<Point> circumcenter(Point a, Point b, Point c) {
  const Point m1{(a.x + b.x) / 2, (a.y + b.y) / 2};
  const Point m2{(b.x + c.x) / 2, (b.y + c.y) / 2};
  // Bisector directions are the chords rotated by 90 degrees (slope -1/m).
  const Point d1{-(b.y - a.y), b.x - a.x};
  const Point d2{-(c.y - b.y), c.x - b.x};
  const double cross = d1.x * d2.y - d1.y * d2.x;
  const double scale = std::hypot(d1.x, d1.y) * std::hypot(d2.x, d2.y);
  if (scale == 0.0 || std::abs(cross) <= 1e-12 * scale) return std::nullopt;
  const double t = ((m2.x - m1.x) * d2.y - (m2.y - m1.y) * d2.x) / cross;
  return Point{m1.x + t * d1.x, m1.y + t * d1.y};
}

inline RoiShape rect_shape(const BitMask& mask) {
  RoiShape s;
  s.kind = ShapeKind::rect;
  s.rect = mask_bounds(mask);
  return s;
}

/// Classify the ROI from its boundary points and fit the enclosing shape.
inline RoiShape fit_shape(const GeomPoints& pts, const BitMask& mask, const RoiConfig& cfg = {}) {
  if (std::max(std::abs(pts.m12), std::abs(pts.m23)) < cfg.slope_tolerance) return rect_shape(mask);
  if (std::abs(pts.m12 - pts.m23) < cfg.parallel_tolerance) return rect_shape(mask);
  const auto c = circumcenter(pts.lower[0], pts.lower[1], pts.lower[2]);
  if (!c) return rect_shape(mask);
  const Point mid{(mask.cols() - 1) / 2.0, (mask.rows() - 1) / 2.0};
  const double diag = std::hypot(static_cast<double>(mask.cols()), static_cast<double>(mask.rows()));
  if (distance(*c, mid) > cfg.max_center_diagonals * diag) return rect_shape(mask);

  RoiShape s;
  s.center = *c;
  for (const auto& p : pts.lower) s.r_outer = std::max(s.r_outer, distance(s.center, p));
  s.r_inner = std::numeric_limits<double>::infinity();
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x)
      if (mask.at(y, x)) s.r_inner = std::min(s.r_inner, distance(s.center, {double(x), double(y)}));
  if (!std::isfinite(s.r_inner)) throw Error(ErrorKind::geometry_degenerate, "empty mask");

  if (distance(s.center, pts.left) == 0.0 || distance(s.center, pts.right) == 0.0)
    throw Error(ErrorKind::geometry_degenerate, "extreme point coincides with the center");
  const double a_left = std::atan2(pts.left.y - s.center.y, pts.left.x - s.center.x);
  const double a_right = std::atan2(pts.right.y - s.center.y, pts.right.x - s.center.x);
  // Pick the arc between the rays that contains straight down (+pi/2).
  const double down = std::numbers::pi / 2;
  if (wrap_two_pi(down - a_right) <= wrap_two_pi(a_left - a_right)) {
    s.theta_right = a_right;
    s.theta_left = a_left;
  } else {
    s.theta_right = a_left;
    s.theta_left = a_right;
  }
  const double span = angular_span(s);
  if (span <= 0.0 || span > std::numbers::pi) throw Error(ErrorKind::geometry_degenerate, "ray span outside (0, pi]");
  s.subtended = acute_angle(slope(s.center, pts.left), slope(s.center, pts.right));

  if (s.r_inner < cfg.notch_fraction * s.r_outer) {
    s.kind = ShapeKind::wedge;
    s.r_inner = 0.0;
  } else {
    s.kind = ShapeKind::notched_wedge;
  }
  if (s.r_inner >= s.r_outer) throw Error(ErrorKind::geometry_degenerate, "inner radius reaches outer radius");
  return s;
}

inline bool in_sector(const RoiShape& s, double x, double y) {
  const double d = std::hypot(x - s.center.x, y - s.center.y);
  if (d < s.r_inner || d > s.r_outer) return false;
  if (d == 0.0) return true;
  const double a = std::atan2(y - s.center.y, x - s.center.x);
  return wrap_two_pi(a - s.theta_right) <= angular_span(s);
}

inline BitMask shape_to_mask(const RoiShape& s, int rows, int cols) {
  BitMask out(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x)
      out.set(y, x, s.is_sector() ? in_sector(s, x, y) : s.rect.contains(x, y));
  return out;
}

// --- end to end -----------------------------------------------------------

struct RoiResult {
  BitMask mask;        // the ROI to keep
  BitMask morph;       // morphological ROI
  std::optional<RoiShape> shape;
  bool fallback = false;
  double subset_ratio = 0.0;  // |morph & geometric| / |morph|
  std::string note;
};

/// Morphological ROI of a stack: max projection, smoothing, threshold,
/// closing, area filter, largest component.
inline BitMask morphological_roi(const FrameStack& stack, const RoiConfig& cfg = {}) {
  const GrayImage projection = max_projection(stack);
  const double sigma = adaptive_sigma(projection.rows(), projection.cols(), cfg);
  const GrayImage smooth = convolve(projection, make_kernel(sigma));
  const BitMask closed = close(threshold(smooth, cfg.threshold), StructElem{disk_radius_for(sigma)});
  return largest_component(area_filter(closed, cfg.area_fraction));
}

/// Geometric ROI when it covers at least subset_ratio of the morphological
/// ROI, otherwise the morphological ROI itself with fallback set.
inline RoiResult final_roi(const FrameStack& stack, const RoiConfig& cfg = {}) {
  BitMask morph = morphological_roi(stack, cfg);
  const std::size_t morph_area = morph.count();
  if (morph_area == 0) throw Error(ErrorKind::empty_roi, "no foreground above threshold");
  RoiResult res{morph, morph, std::nullopt, true, 0.0, {}};
  try {
    const GeomPoints pts = pick_geom_points(morph, cfg);
    RoiShape shape = fit_shape(pts, morph, cfg);
    BitMask geom = shape_to_mask(shape, morph.rows(), morph.cols());
    res.subset_ratio = static_cast<double>(intersection_count(morph, geom)) / static_cast<double>(morph_area);
    res.shape = shape;
    if (res.subset_ratio >= cfg.subset_ratio) {
      res.mask = std::move(geom);
      res.fallback = false;
    } else {
      res.note = "geometric mask covers too little of the morphological ROI";
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::geometry_degenerate) throw;
    res.note = e.what();
  }
  return res;
}

}  // namespace usdeid::roi
