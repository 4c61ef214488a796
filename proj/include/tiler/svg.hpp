#pragma once

#include <string>

#include "tiler/tiling.hpp"

namespace tiler {

struct SvgOptions {
  double width = 1000.0;
  double height = 1000.0;
  double stroke = 0.5;
};

/// The cylinder unrolled into a width x height strip, w = 0 on the left and
/// h = 1 on top. Rectangles crossing the seam are drawn in two pieces. Output
/// depends only on the tiling and the options.
std::string render_svg(const Tiling<double>& t, const SvgOptions& opts = {});

}  // namespace tiler
