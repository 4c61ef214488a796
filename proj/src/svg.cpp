#include "tiler/svg.hpp"

#include <cstdio>

namespace tiler {

namespace {

void append_rect(std::string& out, double x, double y, double w, double h, const char* fill) {
  char buf[192];
  std::snprintf(buf, sizeof buf, "<rect x=\"%.6f\" y=\"%.6f\" width=\"%.6f\" height=\"%.6f\" fill=\"%s\"/>\n", x, y, w,
                h, fill);
  out += buf;
}

}  // namespace

std::string render_svg(const Tiling<double>& t, const SvgOptions& opts) {
  const double W = opts.width;
  const double H = opts.height;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.6f\" height=\"%.6f\" viewBox=\"0 0 %.6f "
                "%.6f\">\n",
                W, H, W, H);
  out += buf;
  std::snprintf(buf, sizeof buf, "<g stroke=\"#222222\" stroke-width=\"%.6f\">\n", opts.stroke);
  out += buf;
  static const char* palette[] = {"#e8eef7", "#cfdcef", "#b5c9e6", "#9cb7de", "#f3e6d0", "#ead3ad"};
  for (std::size_t e = 0; e < t.rects.size(); ++e) {
    const Rect<double>& r = t.rects[e];
    if (r.degenerate || r.width <= 0.0) continue;
    const double y = (1.0 - r.h_high) * H;
    const double h = (r.h_high - r.h_low) * H;
    const char* fill = palette[e % 6];
    if (r.w_start + r.width > 1.0) {
      append_rect(out, r.w_start * W, y, (1.0 - r.w_start) * W, h, fill);
      append_rect(out, 0.0, y, (r.w_start + r.width - 1.0) * W, h, fill);
    } else {
      append_rect(out, r.w_start * W, y, r.width * W, h, fill);
    }
  }
  out += "</g>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"0\" y=\"0\" width=\"%.6f\" height=\"%.6f\" fill=\"none\" stroke=\"#000000\" "
                "stroke-width=\"%.6f\"/>\n",
                W, H, 2.0 * opts.stroke);
  out += buf;
  out += "</svg>\n";
  return out;
}

}  // namespace tiler
