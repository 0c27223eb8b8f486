#include "bevdg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "bevdg/common.hpp"

namespace bevdg::svg {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 440;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::ofstream open(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open for write: " + path);
  return f;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  // Pad the y range a little.
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double px0 = kMarginLeft, px1 = kWidth - kMarginRight;
  const double py0 = kHeight - kMarginBottom, py1 = kMarginTop;
  auto sx = [&](double x) {
    return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0);
  };
  auto sy = [&](double y) {
    return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0);
  };

  std::ofstream f = open(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // Axes with 5 ticks each.
  f << "<line x1=\"" << fmt(px0) << "\" y1=\"" << fmt(py0) << "\" x2=\""
    << fmt(px1) << "\" y2=\"" << fmt(py0) << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << fmt(px0) << "\" y1=\"" << fmt(py0) << "\" x2=\""
    << fmt(px0) << "\" y2=\"" << fmt(py1) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    f << "<line x1=\"" << fmt(sx(xv)) << "\" y1=\"" << fmt(py0) << "\" x2=\""
      << fmt(sx(xv)) << "\" y2=\"" << fmt(py0 + 5) << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(py0 + 20)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" << fmt_tick(xv) << "</text>\n";
    f << "<line x1=\"" << fmt(px0 - 5) << "\" y1=\"" << fmt(sy(yv))
      << "\" x2=\"" << fmt(px0) << "\" y2=\"" << fmt(sy(yv))
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << fmt(px0 - 9) << "\" y=\"" << fmt(sy(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt_tick(yv) << "</text>\n";
  }
  f << "<text x=\"" << fmt((px0 + px1) / 2) << "\" y=\"" << kHeight - 12
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\">" << x_label << "</text>\n";
  f << "<text x=\"18\" y=\"" << fmt((py0 + py1) / 2)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
       "transform=\"rotate(-90 18 " << fmt((py0 + py1) / 2) << ")\">"
    << y_label << "</text>\n";

  int legend_y = kMarginTop + 10;
  for (const Series& s : series) {
    f << "<polyline fill=\"none\" stroke=\"" << s.color
      << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : s.points) {
      f << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
    }
    f << "\"/>\n";
    for (const auto& [x, y] : s.points) {
      f << "<circle cx=\"" << fmt(sx(x)) << "\" cy=\"" << fmt(sy(y))
        << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    }
    f << "<line x1=\"" << px1 + 10 << "\" y1=\"" << legend_y << "\" x2=\""
      << px1 + 34 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << px1 + 40 << "\" y=\"" << legend_y + 4
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
      << "</text>\n";
    legend_y += 18;
  }
  f << "</svg>\n";
  if (!f) throw IoError("write failed: " + path);
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::vector<std::string>& categories,
                     const std::vector<BarGroup>& groups) {
  static const char* kColors[] = {"#4477aa", "#ee6677", "#228833",
                                  "#ccbb44", "#66ccee"};
  const double px0 = kMarginLeft, px1 = kWidth - kMarginRight;
  const double py0 = kHeight - kMarginBottom, py1 = kMarginTop;

  std::ofstream f = open(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  f << "<line x1=\"" << fmt(px0) << "\" y1=\"" << fmt(py0) << "\" x2=\""
    << fmt(px1) << "\" y2=\"" << fmt(py0) << "\" stroke=\"black\"/>\n";

  const size_t ngroups = groups.size();
  const size_t ncats = categories.size();
  if (ngroups == 0 || ncats == 0) {
    f << "</svg>\n";
    return;
  }
  const double group_w = (px1 - px0) / ngroups;
  const double bar_w = group_w / (ncats + 1);
  for (size_t g = 0; g < ngroups; ++g) {
    for (size_t c = 0; c < ncats && c < groups[g].values.size(); ++c) {
      const double v = std::clamp(groups[g].values[c], 0.0, 1.0);
      const double h = v * (py0 - py1);
      const double x = px0 + g * group_w + (c + 0.5) * bar_w;
      f << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(py0 - h) << "\" width=\""
        << fmt(bar_w * 0.9) << "\" height=\"" << fmt(h) << "\" fill=\""
        << kColors[c % 5] << "\"/>\n";
      f << "<text x=\"" << fmt(x + bar_w * 0.45) << "\" y=\""
        << fmt(py0 - h - 4) << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"10\">"
        << fmt(100.0 * v) << "%</text>\n";
    }
    f << "<text x=\"" << fmt(px0 + (g + 0.5) * group_w) << "\" y=\""
      << fmt(py0 + 20) << "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">" << groups[g].name
      << "</text>\n";
  }
  int legend_y = kMarginTop + 10;
  for (size_t c = 0; c < ncats; ++c) {
    f << "<rect x=\"" << px1 + 10 << "\" y=\"" << legend_y - 9
      << "\" width=\"12\" height=\"12\" fill=\"" << kColors[c % 5] << "\"/>\n";
    f << "<text x=\"" << px1 + 28 << "\" y=\"" << legend_y + 2
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << categories[c]
      << "</text>\n";
    legend_y += 18;
  }
  f << "</svg>\n";
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace bevdg::svg
