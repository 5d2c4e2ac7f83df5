#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pdc/constants.hpp"
#include "pdc/grid.hpp"

namespace pdc {

enum class Topology { None, Spot, Ring, Other };

inline std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::None: return "none";
    case Topology::Spot: return "spot";
    case Topology::Ring: return "ring";
    case Topology::Other: return "other";
  }
  return "other";
}

struct SuperlevelSet {
  std::size_t components = 0;  // 4-connected pieces of {v >= level * max}
  std::size_t holes = 0;       // 8-connected complement pieces not touching the border
  bool touches_boundary = false;
};

namespace detail {

/// Flood-fill labelling; returns the number of components and whether each touches the border.
inline std::size_t label_components(const Grid2D<std::uint8_t>& mask, bool eight_connected,
                                    std::vector<bool>* touches_border) {
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  std::vector<std::int32_t> label(rows * cols, -1);
  std::vector<std::size_t> stack;
  std::size_t count = 0;
  for (std::size_t start = 0; start < rows * cols; ++start) {
    if (!mask.data()[start] || label[start] >= 0) continue;
    bool border = false;
    label[start] = static_cast<std::int32_t>(count);
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const std::size_t r = idx / cols;
      const std::size_t c = idx % cols;
      if (r == 0 || c == 0 || r + 1 == rows || c + 1 == cols) border = true;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (!eight_connected && dr != 0 && dc != 0) continue;
          const auto nr = static_cast<std::ptrdiff_t>(r) + dr;
          const auto nc = static_cast<std::ptrdiff_t>(c) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(rows) ||
              nc >= static_cast<std::ptrdiff_t>(cols)) {
            continue;
          }
          const std::size_t n = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
          if (mask.data()[n] && label[n] < 0) {
            label[n] = static_cast<std::int32_t>(count);
            stack.push_back(n);
          }
        }
      }
    }
    if (touches_border) touches_border->push_back(border);
    ++count;
  }
  return count;
}

}  // namespace detail

inline SuperlevelSet analyze_superlevel_set(const Grid2D<double>& values, double level_fraction) {
  const double peak = *std::max_element(values.data().begin(), values.data().end());
  const double threshold = level_fraction * peak;
  Grid2D<std::uint8_t> inside(values.rows(), values.cols());
  Grid2D<std::uint8_t> outside(values.rows(), values.cols());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool in = peak > 0.0 && values.data()[i] >= threshold;
    inside.data()[i] = in;
    outside.data()[i] = !in;
  }
  SuperlevelSet result;
  std::vector<bool> border_in;
  result.components = detail::label_components(inside, false, &border_in);
  result.touches_boundary = std::any_of(border_in.begin(), border_in.end(), [](bool b) { return b; });
  std::vector<bool> border_out;
  const std::size_t out_count = detail::label_components(outside, true, &border_out);
  result.holes = out_count - static_cast<std::size_t>(std::count(border_out.begin(), border_out.end(), true));
  return result;
}

/// Spot: one simply connected half-max region; ring: one region with exactly one hole.
/// None: no cell lies inside the central phase-matching lobe |dk L/2| <= pi.
inline Topology classify_topology(const Grid2D<double>& intensity, const Grid2D<double>& half_mismatch) {
  double closest = INFINITY;
  for (double x : half_mismatch.data()) {
    if (!std::isnan(x)) closest = std::min(closest, std::abs(x));
  }
  if (!(closest <= kPi)) return Topology::None;
  const SuperlevelSet s = analyze_superlevel_set(intensity, 0.5);
  if (s.components == 1 && s.holes == 0) return Topology::Spot;
  if (s.components == 1 && s.holes == 1) return Topology::Ring;
  return Topology::Other;
}

}  // namespace pdc
