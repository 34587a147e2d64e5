#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "usdeid/dicom.hpp"
#include "usdeid/error.hpp"
#include "usdeid/font5x7.hpp"
#include "usdeid/imgbuf.hpp"
#include "usdeid/keyvalue.hpp"
#include "usdeid/roi.hpp"

// Ground-truth phantoms: a sector or rectangular scan region filled with
// per-frame speckle, static burned-in text, exact masks and authored DICOM.
// The rasterizer here is deliberately independent of roi::shape_to_mask so
// the two can check each other.

namespace usdeid::synth {

// --- text -----------------------------------------------------------------

/// Burn a string into a frame with the 5x7 font at integer scale. Pixels
/// falling outside the frame are clipped.
template <int C>
void draw_text(Raster<C>& img, int x, int y, std::string_view text, int scale = 1, std::uint8_t value = 255) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!font::printable(text[i])) throw Error(ErrorKind::rejected_input, "text must be printable ASCII");
    const auto& g = font::glyph(text[i]);
    const int gx = x + static_cast<int>(i) * font::advance * scale;
    for (int row = 0; row < font::glyph_height; ++row)
      for (int col = 0; col < font::glyph_width; ++col) {
        if (!font::lit(g, row, col)) continue;
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) {
            const int py = y + row * scale + dy;
            const int px = gx + col * scale + dx;
            if (py < 0 || px < 0 || py >= img.rows() || px >= img.cols()) continue;
            for (int ch = 0; ch < C; ++ch) img.at(py, px, ch) = value;
          }
      }
  }
}

/// Tight bounds of the ink draw_text would produce; zero-sized for blanks.
inline BoundingBox text_ink_bounds(int x, int y, std::string_view text, int scale = 1) {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto& g = font::glyph(text[i]);
    for (int row = 0; row < font::glyph_height; ++row)
      for (int col = 0; col < font::glyph_width; ++col) {
        if (!font::lit(g, row, col)) continue;
        const int px = x + (static_cast<int>(i) * font::advance + col) * scale;
        const int py = y + row * scale;
        if (!any) {
          x0 = x1 = px;
          y0 = y1 = py;
          any = true;
        }
        x0 = std::min(x0, px);
        y0 = std::min(y0, py);
        x1 = std::max(x1, px + scale - 1);
        y1 = std::max(y1, py + scale - 1);
      }
  }
  if (!any) return {x, y, 0, 0};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

// --- specs ----------------------------------------------------------------

enum class PhantomKind { wedge, notched_wedge, rect };

inline std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::wedge: return "wedge";
    case PhantomKind::notched_wedge: return "notched-wedge";
    case PhantomKind::rect: return "rect";
  }
  return "?";
}

inline PhantomKind parse_kind(std::string_view s) {
  if (s == "wedge") return PhantomKind::wedge;
  if (s == "notched-wedge") return PhantomKind::notched_wedge;
  if (s == "rect") return PhantomKind::rect;
  throw Error(ErrorKind::rejected_input, "unknown phantom kind '" + std::string(s) + "'");
}

struct PlantedText {
  int x = 0;
  int y = 0;
  std::string text;

  friend bool operator==(const PlantedText&, const PlantedText&) = default;
};

/// Angles are degrees in image coordinates (y down, so 90 points straight
/// down). The sector spans from theta_right to theta_left through 90.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::wedge;
  int rows = 256;
  int cols = 384;
  int frames = 8;
  std::uint64_t seed = 1;
  double cx = 192.0;
  double cy = 12.0;
  double r_outer = 200.0;
  double r_inner = 0.0;
  double theta_left_deg = 140.0;
  double theta_right_deg = 40.0;
  BoundingBox rect{0, 0, 0, 0};
  std::vector<PlantedText> texts;
  int text_scale = 1;
  std::vector<BoundingBox> bites;    // removed from the scan region
  std::vector<BoundingBox> patches;  // added to the scan region
  std::string patient_name = "DOE^JANE";
  std::string patient_id = "0000000";
  bool allow_text_in_roi = false;

  friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

struct TextTruth {
  BoundingBox box;
  std::string text;
};

struct GroundTruth {
  BitMask roi_mask;
  std::vector<TextTruth> text_boxes;
};

struct Phantom {
  FrameStack stack;
  GroundTruth truth;
};

namespace detail {

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

inline std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline BoundingBox parse_box(const std::string& v, std::string_view key) {
  const auto p = kv::split(v);
  if (p.size() != 4) throw Error(ErrorKind::rejected_input, std::string(key) + " needs x,y,w,h");
  return {static_cast<int>(kv::to_int(p[0], key)), static_cast<int>(kv::to_int(p[1], key)),
          static_cast<int>(kv::to_int(p[2], key)), static_cast<int>(kv::to_int(p[3], key))};
}

inline std::string box_text(const BoundingBox& b) {
  return std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," + std::to_string(b.h);
}

}  // namespace detail

/// Analytic shape, mask-free: point (x, y) is in the sector iff its radius
/// lies in [r_inner, r_outer] and it sits on the inner side of both rays.
inline bool in_shape(const PhantomSpec& s, double x, double y) {
  if (s.kind == PhantomKind::rect) return s.rect.contains(static_cast<int>(x), static_cast<int>(y));
  const double dx = x - s.cx;
  const double dy = y - s.cy;
  const double d2 = dx * dx + dy * dy;
  const double r_in = s.kind == PhantomKind::wedge ? 0.0 : s.r_inner;
  if (d2 > s.r_outer * s.r_outer || d2 < r_in * r_in) return false;
  if (d2 == 0.0) return true;
  const double a = detail::rad(s.theta_right_deg);
  const double b = detail::rad(s.theta_left_deg);
  return detail::cross(std::cos(a), std::sin(a), dx, dy) >= 0.0 && detail::cross(dx, dy, std::cos(b), std::sin(b)) >= 0.0;
}

/// Exact scan-region mask, pixel centers at integer coordinates.
inline BitMask rasterize(const PhantomSpec& s) {
  BitMask m(s.rows, s.cols);
  for (int y = 0; y < s.rows; ++y)
    for (int x = 0; x < s.cols; ++x) m.set(y, x, in_shape(s, x, y));
  for (const auto& b : s.bites)
    for (int y = std::max(0, b.y); y < std::min(s.rows, b.bottom()); ++y)
      for (int x = std::max(0, b.x); x < std::min(s.cols, b.right()); ++x) m.set(y, x, false);
  for (const auto& b : s.patches)
    for (int y = std::max(0, b.y); y < std::min(s.rows, b.bottom()); ++y)
      for (int x = std::max(0, b.x); x < std::min(s.cols, b.right()); ++x) m.set(y, x, true);
  return m;
}

/// The spec's shape expressed as an roi::RoiShape (radians).
inline roi::RoiShape analytic_shape(const PhantomSpec& s) {
  roi::RoiShape out;
  if (s.kind == PhantomKind::rect) {
    out.kind = roi::ShapeKind::rect;
    out.rect = s.rect;
    return out;
  }
  out.kind = s.kind == PhantomKind::wedge ? roi::ShapeKind::wedge : roi::ShapeKind::notched_wedge;
  out.center = {s.cx, s.cy};
  out.r_outer = s.r_outer;
  out.r_inner = s.kind == PhantomKind::wedge ? 0.0 : s.r_inner;
  out.theta_left = detail::rad(s.theta_left_deg);
  out.theta_right = detail::rad(s.theta_right_deg);
  out.subtended = roi::acute_angle(std::tan(out.theta_left), std::tan(out.theta_right));
  return out;
}

inline void validate(const PhantomSpec& s) {
  auto reject = [](const std::string& why) { throw Error(ErrorKind::rejected_input, "phantom spec: " + why); };
  if (s.rows < 16 || s.cols < 16 || s.rows > 4096 || s.cols > 4096) reject("dims must lie in [16, 4096]");
  if (s.frames < 1 || s.frames > 1024) reject("frames must lie in [1, 1024]");
  if (s.text_scale < 1 || s.text_scale > 8) reject("text_scale must lie in [1, 8]");
  const double lo_x = -0.5, hi_x = s.cols - 0.5, lo_y = -0.5, hi_y = s.rows - 0.5;
  auto inside = [&](double x, double y) { return x >= lo_x && x < hi_x && y >= lo_y && y < hi_y; };
  if (s.kind == PhantomKind::rect) {
    if (s.rect.w < 1 || s.rect.h < 1 || !s.rect.fits(s.rows, s.cols)) reject("rect must lie inside the frame");
  } else {
    const double span = s.theta_left_deg - s.theta_right_deg;
    if (!(span > 0.0 && span <= 180.0)) reject("theta_left_deg - theta_right_deg must lie in (0, 180]");
    const double down = 90.0;
    if (down < s.theta_right_deg || down > s.theta_left_deg) reject("sector must contain the downward direction");
    const double r_in = s.kind == PhantomKind::wedge ? 0.0 : s.r_inner;
    if (!(s.r_outer > 0.0) || r_in < 0.0 || r_in >= s.r_outer) reject("need 0 <= r_inner < r_outer");
    if (s.kind == PhantomKind::notched_wedge && !(s.r_inner > 0.0)) reject("notched wedge needs r_inner > 0");
    // Sample the boundary densely: both arcs and both rays.
    constexpr int samples = 2048;
    for (int i = 0; i <= samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      const double a = detail::rad(s.theta_right_deg + t * span);
      for (double r : {r_in, s.r_outer})
        if (!inside(s.cx + r * std::cos(a), s.cy + r * std::sin(a))) reject("sector overflows the frame");
      const double r = r_in + t * (s.r_outer - r_in);
      for (double edge : {s.theta_right_deg, s.theta_left_deg}) {
        const double e = detail::rad(edge);
        if (!inside(s.cx + r * std::cos(e), s.cy + r * std::sin(e))) reject("sector overflows the frame");
      }
    }
  }
  for (const auto& b : s.bites)
    if (b.w < 1 || b.h < 1) reject("bite must be non-empty");
  for (const auto& b : s.patches)
    if (b.w < 1 || b.h < 1 || !b.fits(s.rows, s.cols)) reject("patch must lie inside the frame");
  if (s.texts.empty()) return;
  const BitMask roi_mask = rasterize(s);
  for (const auto& t : s.texts) {
    if (t.text.empty()) reject("planted text must be non-empty");
    for (char ch : t.text)
      if (!font::printable(ch)) reject("planted text must be printable ASCII");
    const BoundingBox cell{t.x, t.y, static_cast<int>(t.text.size()) * font::advance * s.text_scale,
                           font::glyph_height * s.text_scale};
    if (!cell.fits(s.rows, s.cols)) reject("text '" + t.text + "' leaves the frame");
    if (s.allow_text_in_roi) continue;
    constexpr int margin = 3;
    for (int y = cell.y - margin; y < cell.bottom() + margin; ++y)
      for (int x = cell.x - margin; x < cell.right() + margin; ++x)
        if (roi_mask.get_or(y, x, false)) reject("text '" + t.text + "' overlaps the scan region");
  }
}

/// Speckle stream for one frame, seeded from (seed, frame index).
inline std::mt19937 frame_rng(std::uint64_t seed, int frame) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(frame)};
  return std::mt19937(seq);
}

inline Phantom render(const PhantomSpec& s) {
  validate(s);
  BitMask roi_mask = rasterize(s);
  std::vector<GrayImage> frames;
  frames.reserve(static_cast<std::size_t>(s.frames));
  for (int f = 0; f < s.frames; ++f) {
    auto rng = frame_rng(s.seed, f);
    GrayImage img(s.rows, s.cols);
    for (std::size_t i = 0; i < roi_mask.size(); ++i)
      if (roi_mask[i]) img.data()[i] = static_cast<std::uint8_t>(40 + rng() % 216);
    for (const auto& t : s.texts) draw_text(img, t.x, t.y, t.text, s.text_scale);
    frames.push_back(std::move(img));
  }
  GroundTruth truth{std::move(roi_mask), {}};
  for (const auto& t : s.texts) truth.text_boxes.push_back({text_ink_bounds(t.x, t.y, t.text, s.text_scale), t.text});
  return {FrameStack("phantom", std::move(frames)), std::move(truth)};
}

// --- serialization --------------------------------------------------------

inline std::string to_text(const PhantomSpec& s) {
  std::ostringstream o;
  o << "kind = " << to_string(s.kind) << "\n";
  o << "rows = " << s.rows << "\ncols = " << s.cols << "\nframes = " << s.frames << "\nseed = " << s.seed << "\n";
  if (s.kind == PhantomKind::rect) {
    o << "rect = " << detail::box_text(s.rect) << "\n";
  } else {
    o << "center = " << detail::num(s.cx) << "," << detail::num(s.cy) << "\n";
    o << "r_outer = " << detail::num(s.r_outer) << "\n";
    if (s.kind == PhantomKind::notched_wedge) o << "r_inner = " << detail::num(s.r_inner) << "\n";
    o << "theta_left_deg = " << detail::num(s.theta_left_deg) << "\n";
    o << "theta_right_deg = " << detail::num(s.theta_right_deg) << "\n";
  }
  for (const auto& b : s.bites) o << "bite = " << detail::box_text(b) << "\n";
  for (const auto& b : s.patches) o << "patch = " << detail::box_text(b) << "\n";
  if (s.text_scale != 1) o << "text_scale = " << s.text_scale << "\n";
  for (const auto& t : s.texts) o << "text = " << t.x << "," << t.y << "," << t.text << "\n";
  o << "patient_name = " << s.patient_name << "\npatient_id = " << s.patient_id << "\n";
  if (s.allow_text_in_roi) o << "allow_text_in_roi = true\n";
  return o.str();
}

inline bool parse_bool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::rejected_input, std::string(key) + ": expected true or false");
}

/// Parse a spec file. Text values keep inner whitespace, but a planted
/// string cannot contain '#' since that starts a comment.
inline PhantomSpec from_text(std::string_view text) {
  PhantomSpec s;
  s.texts.clear();
  for (const auto& e : kv::parse(text)) {
    const std::string& k = e.key;
    const std::string& v = e.value;
    if (k == "kind") s.kind = parse_kind(v);
    else if (k == "rows") s.rows = static_cast<int>(kv::to_int(v, k));
    else if (k == "cols") s.cols = static_cast<int>(kv::to_int(v, k));
    else if (k == "frames") s.frames = static_cast<int>(kv::to_int(v, k));
    else if (k == "seed") s.seed = static_cast<std::uint64_t>(kv::to_int(v, k));
    else if (k == "center") {
      const auto p = kv::split(v);
      if (p.size() != 2) throw Error(ErrorKind::rejected_input, "center needs x,y");
      s.cx = kv::to_double(p[0], k);
      s.cy = kv::to_double(p[1], k);
    } else if (k == "r_outer") s.r_outer = kv::to_double(v, k);
    else if (k == "r_inner") s.r_inner = kv::to_double(v, k);
    else if (k == "theta_left_deg") s.theta_left_deg = kv::to_double(v, k);
    else if (k == "theta_right_deg") s.theta_right_deg = kv::to_double(v, k);
    else if (k == "rect") s.rect = detail::parse_box(v, k);
    else if (k == "bite") s.bites.push_back(detail::parse_box(v, k));
    else if (k == "patch") s.patches.push_back(detail::parse_box(v, k));
    else if (k == "text_scale") s.text_scale = static_cast<int>(kv::to_int(v, k));
    else if (k == "text") {
      const auto p = kv::split(v, 3);
      if (p.size() != 3) throw Error(ErrorKind::rejected_input, "text needs x,y,STRING");
      s.texts.push_back({static_cast<int>(kv::to_int(p[0], k)), static_cast<int>(kv::to_int(p[1], k)), p[2]});
    } else if (k == "patient_name") s.patient_name = v;
    else if (k == "patient_id") s.patient_id = v;
    else if (k == "allow_text_in_roi") s.allow_text_in_roi = parse_bool(v, k);
    else throw Error(ErrorKind::rejected_input, "line " + std::to_string(e.line) + ": unknown key '" + k + "'");
  }
  return s;
}

// --- DICOM authoring ------------------------------------------------------

struct PatientFields {
  std::string name = "DOE^JANE";
  std::string id = "0000000";
  std::string instance_uid = "2.25.1";
};

inline constexpr std::string_view us_multiframe_sop_class = "1.2.840.10008.5.1.4.1.1.3.1";

/// Minimal Explicit VR Little Endian file carrying the stack's pixels.
inline std::vector<std::uint8_t> author_dicom(const FrameStack& stack, const PatientFields& patient = {}) {
  namespace t = dicom::tags;
  dicom::Writer w;
  w.add({0x0002, 0x0001}, "OB", {0x00, 0x01});
  w.add_string({0x0002, 0x0002}, "UI", us_multiframe_sop_class);
  w.add_string({0x0002, 0x0003}, "UI", patient.instance_uid);
  w.add_string(t::transfer_syntax, "UI", dicom::explicit_vr_little_endian);
  w.add_string({0x0008, 0x0016}, "UI", us_multiframe_sop_class);
  w.add_string({0x0008, 0x0018}, "UI", patient.instance_uid);
  w.add_string({0x0008, 0x0060}, "CS", "US");
  w.add_string(t::patient_name, "PN", patient.name);
  w.add_string(t::patient_id, "LO", patient.id);
  const bool rgb = stack.channels() == 3;
  w.add_us(t::samples_per_pixel, rgb ? 3 : 1);
  w.add_string(t::photometric, "CS", rgb ? "RGB" : "MONOCHROME2");
  if (rgb) w.add_us(t::planar_configuration, 0);
  w.add_string(t::number_of_frames, "IS", std::to_string(stack.size()));
  w.add_us(t::rows, static_cast<std::uint16_t>(stack.rows()));
  w.add_us(t::columns, static_cast<std::uint16_t>(stack.cols()));
  w.add_us(t::bits_allocated, 8);
  w.add_us({0x0028, 0x0101}, 8);
  w.add_us({0x0028, 0x0102}, 7);
  w.add_us({0x0028, 0x0103}, 0);
  std::vector<std::uint8_t> pixels;
  pixels.reserve(stack.raw_bytes());
  stack.visit([&](const auto& frames) {
    for (const auto& f : frames) pixels.insert(pixels.end(), f.data().begin(), f.data().end());
  });
  w.add(t::pixel_data, "OB", std::move(pixels));
  return w.bytes();
}

inline PatientFields patient_fields(const PhantomSpec& s) {
  return {s.patient_name, s.patient_id, "2.25." + std::to_string(s.seed)};
}

// --- corpus ---------------------------------------------------------------

namespace detail {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  std::uint64_t raw() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline constexpr std::array<std::string_view, 12> string_pool = {
    "DOE^JANE", "HR 72",      "ID 4839201", "2019-04-12", "GAIN 54%", "MI 1.2",
    "jane",     "SMITH^JOHN", "14:32:07",   "DR. LEE",    "TIS 0.4",  "ACC 77120"};

inline bool place_texts(PhantomSpec& s, Draw& d) {
  std::vector<std::string_view> pool(string_pool.begin(), string_pool.end());
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[static_cast<std::size_t>(d.raw() % i)]);
  const int want = d.integer(2, 3);
  const int h = font::glyph_height * s.text_scale;
  std::array<int, 4> order{0, 1, 2, 3};
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(d.raw() % i)]);
  std::size_t next = 0;
  for (int corner : order) {
    if (static_cast<int>(s.texts.size()) == want) break;
    const std::string text(pool[next++]);
    const int w = static_cast<int>(text.size()) * font::advance * s.text_scale;
    const int x = corner % 2 == 0 ? 4 : s.cols - 4 - w;
    const int y = corner / 2 == 0 ? 4 : s.rows - 4 - h;
    PhantomSpec trial = s;
    trial.texts.push_back({x, y, text});
    try {
      validate(trial);
      s = std::move(trial);
    } catch (const Error&) {
      // Corner blocked by the scan region; try the next one.
    }
  }
  return !s.texts.empty();
}

inline PhantomSpec base_spec(Draw& d, std::uint64_t seed, int index) {
  PhantomSpec s;
  s.seed = seed * 1000 + static_cast<std::uint64_t>(index);
  s.patient_name = std::string(string_pool[static_cast<std::size_t>(index) % 2 == 0 ? 0 : 7]);
  s.patient_id = std::to_string(1000000 + d.integer(0, 8999999));
  return s;
}

}  // namespace detail

/// One random phantom of the requested kind. Geometry is redrawn until the
/// spec validates and at least one string fits outside the scan region.
inline PhantomSpec random_spec(PhantomKind kind, std::uint64_t seed, int index) {
  detail::Draw d(seed * 7919 + static_cast<std::uint64_t>(index) * 104729 + static_cast<std::uint64_t>(kind));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    PhantomSpec s = detail::base_spec(d, seed, index);
    s.kind = kind;
    if (kind == PhantomKind::rect) {
      const int w = d.integer(110, 300);
      const int h = d.integer(90, 200);
      s.rect = {d.integer(20, s.cols - 20 - w), d.integer(16, s.rows - 16 - h), w, h};
    } else if (kind == PhantomKind::wedge) {
      s.cx = s.cols / 2.0 + d.uniform(-8, 8);
      s.cy = d.uniform(6, 18);
      const double mid = 90.0 + d.uniform(-4, 4);
      const double span = d.uniform(85, 110);
      s.theta_right_deg = mid - span / 2;
      s.theta_left_deg = mid + span / 2;
      s.r_outer = d.uniform(150, s.rows - 4 - s.cy);
    } else {
      s.cx = s.cols / 2.0 + d.uniform(-10, 10);
      s.cy = d.uniform(-50, 5);
      const double mid = 90.0 + d.uniform(-3, 3);
      const double span = d.uniform(55, 90);
      s.theta_right_deg = mid - span / 2;
      s.theta_left_deg = mid + span / 2;
      const double sin_edge = std::sin(detail::rad(s.theta_right_deg));
      const double r_min_inner = (6.0 - s.cy) / sin_edge;
      s.r_outer = d.uniform(std::max(130.0, r_min_inner * 2.5), s.rows - 4 - s.cy);
      s.r_inner = std::max(r_min_inner, d.uniform(0.15, 0.35) * s.r_outer);
    }
    try {
      validate(s);
    } catch (const Error&) {
      continue;
    }
    if (detail::place_texts(s, d)) return s;
  }
  throw Error(ErrorKind::rejected_input, "could not draw a valid phantom");
}

/// Ten each of wedge, notched wedge and rectangle.
inline std::vector<PhantomSpec> make_corpus(std::uint64_t seed, int per_kind = 10) {
  std::vector<PhantomSpec> out;
  int index = 0;
  for (PhantomKind k : {PhantomKind::wedge, PhantomKind::notched_wedge, PhantomKind::rect})
    for (int i = 0; i < per_kind; ++i) out.push_back(random_spec(k, seed, index++));
  return out;
}

/// A wedge whose lower boundary carries a shallow bite under the middle
/// sample column. The circle through the sampled points is then too flat,
/// its center lands too high and the fitted sector misses the real apex.
inline PhantomSpec adversarial_spec(std::uint64_t seed = 1) {
  PhantomSpec s;
  s.kind = PhantomKind::wedge;
  s.seed = seed;
  s.cx = 192;
  s.cy = 12;
  s.r_outer = 236;
  s.theta_right_deg = 40;
  s.theta_left_deg = 140;
  s.bites.push_back({162, 228, 60, 30});
  s.texts.push_back({4, 4, "DOE^JANE"});
  s.texts.push_back({4, 245, "HR 72"});
  return s;
}

}  // namespace usdeid::synth
