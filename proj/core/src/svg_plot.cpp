#include "simplex_eval/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 48;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string rect(double x, double y, double w, double h, const std::string& style) {
  return "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
         fmt(h) + "\" " + style + "/>\n";
}

std::string line(double x1, double y1, double x2, double y2, const std::string& style) {
  return "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" +
         fmt(y2) + "\" " + style + "/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& style) {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" " + style + ">" + s + "</text>\n";
}

}  // namespace

void write_histogram_svg(const std::string& path, const std::string& title,
                         const Histogram& hist, const CredibleInterval& hpdi_interval,
                         const CredibleInterval& rtci_interval) {
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
                    "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
                    fmt(kHeight) + "\">\n";
  svg += rect(0, 0, kWidth, kHeight, "fill=\"white\"");
  svg += text(kLeft, 24, title, "font-family=\"sans-serif\" font-size=\"15\"");

  if (hist.counts.empty()) {
    svg += text(kWidth / 2 - 60, kHeight / 2, "no finite values",
                "font-family=\"sans-serif\" font-size=\"14\" fill=\"#666\"");
    svg += "</svg>\n";
  } else {
    double lo = hist.edges.front();
    double hi = hist.edges.back();
    if (lo == hi) {  // single-point distribution
      lo -= 0.5;
      hi += 0.5;
    }
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double v) { return kLeft + (v - lo) / (hi - lo) * plot_w; };
    std::uint64_t cmax = 1;
    for (std::uint64_t c : hist.counts) cmax = std::max(cmax, c);
    const auto sy = [&](double c) { return kTop + plot_h * (1.0 - c / static_cast<double>(cmax)); };

    // HPDI band under the bars.
    const double bl = std::isfinite(hpdi_interval.lower) ? std::clamp(hpdi_interval.lower, lo, hi) : lo;
    const double bu = std::isfinite(hpdi_interval.upper) ? std::clamp(hpdi_interval.upper, lo, hi) : hi;
    svg += rect(sx(bl), kTop, std::max(sx(bu) - sx(bl), 1.0), plot_h,
                "fill=\"#cfe3f7\" stroke=\"none\"");

    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      const double x0 = hist.edges.size() == 2 ? sx(hist.edges.front()) - plot_w / 100
                                               : sx(hist.edges[i]);
      const double x1 = hist.edges.size() == 2 ? sx(hist.edges.back()) + plot_w / 100
                                               : sx(hist.edges[i + 1]);
      const double y = sy(static_cast<double>(hist.counts[i]));
      svg += rect(x0, y, std::max(x1 - x0, 0.5), kTop + plot_h - y,
                  "fill=\"#4878a8\" stroke=\"white\" stroke-width=\"0.5\"");
    }

    // Axes and ticks.
    svg += line(kLeft, kTop, kLeft, kTop + plot_h, "stroke=\"black\"");
    svg += line(kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h, "stroke=\"black\"");
    for (int t = 0; t <= 4; ++t) {
      const double v = lo + (hi - lo) * t / 4.0;
      svg += line(sx(v), kTop + plot_h, sx(v), kTop + plot_h + 5, "stroke=\"black\"");
      svg += text(sx(v) - 14, kTop + plot_h + 20, fmt(v),
                  "font-family=\"sans-serif\" font-size=\"11\"");
    }
    svg += text(kLeft - 50, kTop + 12, std::to_string(cmax),
                "font-family=\"sans-serif\" font-size=\"11\"");

    if (std::isfinite(rtci_interval.upper)) {
      const double rx = sx(std::clamp(rtci_interval.upper, lo, hi));
      svg += line(rx, kTop, rx, kTop + plot_h,
                  "stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"6,3\"");
      svg += text(rx + 4, kTop + 14, "rtci " + fmt(rtci_interval.upper),
                  "font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\"");
    } else {
      svg += text(kLeft + plot_w - 110, kTop + 14, "rtci unbounded",
                  "font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\"");
    }
    svg += text(kLeft, kHeight - 10,
                "hpdi [" + fmt(hpdi_interval.lower) + ", " + fmt(hpdi_interval.upper) +
                    "] mass " + fmt(hpdi_interval.mass),
                "font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\"");
    svg += "</svg>\n";
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os.write(svg.data(), static_cast<std::streamsize>(svg.size()));
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

}  // namespace simplex_eval
