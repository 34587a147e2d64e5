#pragma once

#include <string>
#include <string_view>

#include "usdeid/keyvalue.hpp"
#include "usdeid/roi.hpp"
#include "usdeid/textmask.hpp"

namespace usdeid {

/// Tunable constants of the pipeline in one place.
struct Tunables {
  roi::RoiConfig roi;
  textmask::OverlayConfig overlay;
  textmask::DetectConfig detect;

  /// The background threshold feeds both the ROI and the overlay map.
  void set_threshold(int t) {
    if (t < 0 || t > 255) throw Error(ErrorKind::rejected_input, "threshold must lie in [0, 255]");
    roi.threshold = t;
    overlay.background_threshold = t;
  }
  int threshold() const { return roi.threshold; }
};

inline void apply_setting(Tunables& t, const std::string& key, const std::string& value) {
  auto real = [&] { return kv::to_double(value, key); };
  auto integer = [&] { return static_cast<int>(kv::to_int(value, key)); };
  auto& r = t.roi;
  auto& o = t.overlay;
  auto& d = t.detect;
  if (key == "threshold") t.set_threshold(integer());
  else if (key == "min_sigma") r.min_sigma = real();
  else if (key == "sigma_divisor") r.sigma_divisor = real();
  else if (key == "area_fraction") r.area_fraction = real();
  else if (key == "slope_tolerance") r.slope_tolerance = real();
  else if (key == "parallel_tolerance") r.parallel_tolerance = real();
  else if (key == "max_center_diagonals") r.max_center_diagonals = real();
  else if (key == "subset_ratio") r.subset_ratio = real();
  else if (key == "notch_fraction") r.notch_fraction = real();
  else if (key == "var_eps") o.var_eps = real();
  else if (key == "bright_margin") o.bright_margin = integer();
  else if (key == "min_glyph_height") d.min_height = integer();
  else if (key == "max_glyph_height") d.max_height = integer();
  else if (key == "min_glyph_area") d.min_area = static_cast<std::size_t>(std::max(0, integer()));
  else if (key == "min_vertical_overlap") d.min_vertical_overlap = real();
  else if (key == "gap_factor") d.gap_factor = real();
  else throw Error(ErrorKind::rejected_input, "unknown tunable '" + key + "'");

  if (!(r.min_sigma > 0.0) || !(r.sigma_divisor > 0.0)) throw Error(ErrorKind::rejected_input, "sigma settings must be positive");
  if (r.area_fraction < 0.0 || r.area_fraction >= 1.0) throw Error(ErrorKind::rejected_input, "area_fraction must lie in [0, 1)");
  if (r.subset_ratio < 0.0 || r.subset_ratio > 1.0) throw Error(ErrorKind::rejected_input, "subset_ratio must lie in [0, 1]");
  if (d.min_height < 1 || d.max_height < d.min_height) throw Error(ErrorKind::rejected_input, "bad glyph height range");
}

/// Apply a `key = value` file on top of the defaults.
inline Tunables parse_tunables(std::string_view text, Tunables base = {}) {
  for (const auto& e : kv::parse(text)) apply_setting(base, e.key, e.value);
  return base;
}

}  // namespace usdeid
