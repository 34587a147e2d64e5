#pragma once

#include <cstddef>
#include <vector>

#include "usdeid/imgbuf.hpp"

namespace usdeid {

struct Component {
  BoundingBox box;
  std::size_t area = 0;
};

/// Connected-component labelling. labels[i] is -1 for background, otherwise
/// the index into components. Components are numbered in raster order of
/// their first pixel.
struct Labeling {
  std::vector<int> labels;
  std::vector<Component> components;
};

inline Labeling label_components(const BitMask& mask, int connectivity = 8) {
  const int rows = mask.rows();
  const int cols = mask.cols();
  Labeling out;
  out.labels.assign(mask.size(), -1);
  std::vector<int> stack;
  for (int r0 = 0; r0 < rows; ++r0) {
    for (int c0 = 0; c0 < cols; ++c0) {
      const int start = r0 * cols + c0;
      if (!mask[start] || out.labels[start] >= 0) continue;
      const int id = static_cast<int>(out.components.size());
      int x0 = c0, x1 = c0, y0 = r0, y1 = r0;
      std::size_t area = 0;
      out.labels[start] = id;
      stack.push_back(start);
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int r = idx / cols;
        const int c = idx % cols;
        ++area;
        x0 = std::min(x0, c);
        x1 = std::max(x1, c);
        y0 = std::min(y0, r);
        y1 = std::max(y1, r);
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (connectivity == 4 && dr != 0 && dc != 0) continue;
            const int rr = r + dr;
            const int cc = c + dc;
            if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
            const int n = rr * cols + cc;
            if (mask[n] && out.labels[n] < 0) {
              out.labels[n] = id;
              stack.push_back(n);
            }
          }
        }
      }
      out.components.push_back({{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, area});
    }
  }
  return out;
}

/// Mask holding only the pixels of the given component.
inline BitMask component_mask(const BitMask& like, const Labeling& lab, int id) {
  BitMask out(like.rows(), like.cols());
  for (std::size_t i = 0; i < lab.labels.size(); ++i)
    if (lab.labels[i] == id) out.set_index(i, true);
  return out;
}

/// Largest 8-connected component; ties go to the earliest in raster order.
/// Returns an all-clear mask when the input is empty.
inline BitMask largest_component(const BitMask& mask) {
  const Labeling lab = label_components(mask, 8);
  if (lab.components.empty()) return BitMask(mask.rows(), mask.cols());
  int best = 0;
  for (int i = 1; i < static_cast<int>(lab.components.size()); ++i)
    if (lab.components[i].area > lab.components[best].area) best = i;
  return component_mask(mask, lab, best);
}

}  // namespace usdeid
