#include "ioc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace ioc {

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  const auto w = static_cast<std::size_t>(std::max(window, 1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= w) acc -= values[i - w];
    out[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  return out;
}

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 160;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void polyline(std::ostream& out, const std::vector<double>& ys, double x_max, double y_min, double y_max,
              const std::string& color, double width, double opacity) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" stroke-opacity=\""
      << opacity << "\" points=\"";
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = kLeft + pw * (x_max > 0 ? static_cast<double>(i) / x_max : 0.0);
    const double y = kTop + ph * (1.0 - (ys[i] - y_min) / (y_max - y_min));
    fmt::print(out, "{:.2f},{:.2f} ", x, y);
  }
  out << "\"/>\n";
}

}  // namespace

void write_line_chart_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series, int smoothing_window) {
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  std::size_t n = 0;
  for (const Series& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
    n = std::max(n, s.values.size());
  }
  if (!std::isfinite(y_min)) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  const double x_max = n > 1 ? static_cast<double>(n - 1) : 1.0;

  fmt::print(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
             kWidth, kHeight, kWidth, kHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  fmt::print(out, "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
             (kWidth - kRight + kLeft) / 2, escape(title));

  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  fmt::print(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x1, y0);
  fmt::print(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", x0, y0, x0, y1);
  for (int t = 0; t <= 4; ++t) {
    const double frac = t / 4.0;
    const double yv = y_min + frac * (y_max - y_min);
    const double yp = y0 - frac * (y0 - y1);
    fmt::print(out, "<text x=\"{}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.4g}</text>\n",
               x0 - 6, yp + 4, yv);
    const double xv = frac * x_max;
    const double xp = x0 + frac * (x1 - x0);
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{:.0f}</text>\n",
               xp, y0 + 16, xv);
  }
  fmt::print(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
             (x0 + x1) / 2, kHeight - 12, escape(x_label));
  fmt::print(out,
             "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
             "transform=\"rotate(-90 16 {})\">{}</text>\n",
             (y0 + y1) / 2, (y0 + y1) / 2, escape(y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    if (smoothing_window > 1) {
      polyline(out, s.values, x_max, y_min, y_max, s.color, 1.0, 0.3);
      polyline(out, moving_average(s.values, smoothing_window), x_max, y_min, y_max, s.color, 2.0, 1.0);
    } else {
      polyline(out, s.values, x_max, y_min, y_max, s.color, 1.5, 1.0);
    }
    const double ly = kTop + 20.0 * static_cast<double>(k);
    fmt::print(out, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", x1 + 12,
               ly, x1 + 32, ly, s.color);
    fmt::print(out, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", x1 + 38,
               ly + 4, escape(s.label));
  }
  out << "</svg>\n";
}

void write_heatmap_svg(std::ostream& out, const std::string& title, int rows, int cols,
                       const std::vector<double>& values) {
  const double cell = std::max(4.0, 360.0 / std::max(rows, cols));
  const double w = cell * cols;
  const double h = cell * rows + 30;
  fmt::print(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", w,
             h, w, h);
  fmt::print(out, "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
             w / 2, escape(title));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = values[static_cast<std::size_t>(r * cols + c)];
      std::string fill = "#404040";
      if (!std::isnan(v)) {
        // Dark blue (0) to yellow (1).
        const double t = std::clamp(v, 0.0, 1.0);
        const int red = static_cast<int>(std::lround(30 + 225 * t));
        const int green = static_cast<int>(std::lround(20 + 215 * t));
        const int blue = static_cast<int>(std::lround(110 * (1.0 - t)));
        fill = fmt::format("#{:02x}{:02x}{:02x}", red, green, blue);
      }
      fmt::print(out, "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", c * cell,
                 30 + r * cell, cell, cell, fill);
    }
  }
  out << "</svg>\n";
}

}  // namespace ioc
