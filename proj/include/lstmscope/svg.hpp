#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/report.hpp"

namespace lstmscope {
namespace svg {

struct Canvas {
  int width = 760;
  int height = 420;
  int left = 70, right = 30, top = 40, bottom = 55;

  int plot_w() const { return width - left - right; }
  int plot_h() const { return height - top - bottom; }
};

namespace detail {

inline std::string fmt(double v, int prec = 3) {
  std::ostringstream oss;
  oss.setf(std::ios::fixed);
  oss.precision(prec);
  oss << v;
  std::string s = oss.str();
  // Trim trailing zeros for tick labels.
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  return s.empty() ? "0" : s;
}

inline double map_x(double x, double xmin, double xmax, const Canvas& c) {
  if (xmax == xmin) return c.left;
  return c.left + (x - xmin) / (xmax - xmin) * c.plot_w();
}

inline double map_y(double y, double ymin, double ymax, const Canvas& c) {
  if (ymax == ymin) return c.top + c.plot_h();
  return c.top + c.plot_h() - (y - ymin) / (ymax - ymin) * c.plot_h();
}

inline void open_svg(std::ostream& out, const Canvas& c, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width
      << "\" height=\"" << c.height << "\" viewBox=\"0 0 " << c.width << " "
      << c.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << c.width << "\" height=\"" << c.height
      << "\" fill=\"white\"/>\n"
      << "<style>\n"
      << "  .axis { stroke:#000; stroke-width:1; }\n"
      << "  .grid { stroke:#ddd; stroke-width:1; }\n"
      << "  .label { font-family:Arial,sans-serif; font-size:11px; fill:#000; }\n"
      << "  .title { font-family:Arial,sans-serif; font-size:13px; font-weight:bold; fill:#000; }\n"
      << "</style>\n"
      << "<text class=\"title\" x=\"" << c.width / 2
      << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
}

inline void close_svg(std::ostream& out) { out << "</svg>\n"; }

inline void axes(std::ostream& out, const Canvas& c, double xmin, double xmax,
                 double ymin, double ymax, const std::string& xlabel,
                 const std::string& ylabel, int xticks = 8, int yticks = 5) {
  for (int i = 0; i <= xticks; ++i) {
    const double tx = xmin + (xmax - xmin) * i / xticks;
    const double px = map_x(tx, xmin, xmax, c);
    out << "<line class=\"grid\" x1=\"" << px << "\" y1=\"" << c.top << "\" x2=\""
        << px << "\" y2=\"" << c.top + c.plot_h() << "\"/>\n";
    out << "<text class=\"label\" x=\"" << px << "\" y=\"" << c.top + c.plot_h() + 16
        << "\" text-anchor=\"middle\">" << fmt(tx) << "</text>\n";
  }
  for (int i = 0; i <= yticks; ++i) {
    const double ty = ymin + (ymax - ymin) * i / yticks;
    const double py = map_y(ty, ymin, ymax, c);
    out << "<line class=\"grid\" x1=\"" << c.left << "\" y1=\"" << py << "\" x2=\""
        << c.left + c.plot_w() << "\" y2=\"" << py << "\"/>\n";
    out << "<text class=\"label\" x=\"" << c.left - 6 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">" << fmt(ty) << "</text>\n";
  }
  out << "<line class=\"axis\" x1=\"" << c.left << "\" y1=\"" << c.top + c.plot_h()
      << "\" x2=\"" << c.left + c.plot_w() << "\" y2=\"" << c.top + c.plot_h()
      << "\"/>\n";
  out << "<line class=\"axis\" x1=\"" << c.left << "\" y1=\"" << c.top << "\" x2=\""
      << c.left << "\" y2=\"" << c.top + c.plot_h() << "\"/>\n";
  out << "<text class=\"label\" x=\"" << c.left + c.plot_w() / 2 << "\" y=\""
      << c.height - 8 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text class=\"label\" x=\"16\" y=\"" << c.top + c.plot_h() / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << c.top + c.plot_h() / 2 << ")\">" << ylabel << "</text>\n";
}

inline void polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts,
                     double xmin, double xmax, double ymin, double ymax, const Canvas& c,
                     const std::string& stroke, double width = 1.5,
                     const std::string& dash = "") {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
      << "\"";
  if (!dash.empty()) out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (const auto& [x, y] : pts)
    out << map_x(x, xmin, xmax, c) << "," << map_y(y, ymin, ymax, c) << " ";
  out << "\"/>\n";
}

inline void span_bounds(const Vec& values, double& lo, double& hi) {
  lo = *std::min_element(values.begin(), values.end());
  hi = *std::max_element(values.begin(), values.end());
  if (lo > 0.0) lo = 0.0;
  if (hi < 0.0) hi = 0.0;
  if (hi == lo) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

}  // namespace detail

// Ranked bar distribution of one metric across cells (values already
// sorted by the caller).
inline void write_ranked_bar_svg(const Vec& sorted_values, const std::string& title,
                                 const std::string& ylabel, const std::string& path) {
  require(!sorted_values.empty(), "write_ranked_bar_svg: empty values");
  Canvas c;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path);
  detail::open_svg(out, c, title);
  double lo, hi;
  detail::span_bounds(sorted_values, lo, hi);
  const double xmax = static_cast<double>(sorted_values.size());
  detail::axes(out, c, 0.0, xmax, lo, hi, "cell rank", ylabel);
  const double zero_y = detail::map_y(0.0, lo, hi, c);
  const double bar_w =
      std::max(1.0, static_cast<double>(c.plot_w()) / xmax - 1.0);
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    const double x0 = detail::map_x(static_cast<double>(i), 0.0, xmax, c);
    const double vy = detail::map_y(sorted_values[i], lo, hi, c);
    const double top = std::min(vy, zero_y);
    const double h = std::max(0.5, std::abs(zero_y - vy));
    out << "<rect x=\"" << x0 << "\" y=\"" << top << "\" width=\"" << bar_w
        << "\" height=\"" << h << "\" fill=\"#4878cf\"/>\n";
  }
  detail::close_svg(out);
  require(static_cast<bool>(out), "failed writing " + path);
}

// Cell-output heatmap for one input sequence: rows are cells (any given
// order), columns are time steps, diverging blue-white-red over ±|y|max.
inline void write_heatmap_svg(const std::vector<Vec>& rows, const std::string& title,
                              const std::string& path) {
  require(!rows.empty() && !rows.front().empty(), "write_heatmap_svg: empty matrix");
  const std::size_t T = rows.front().size();
  for (const auto& r : rows)
    require(r.size() == T, "write_heatmap_svg: ragged rows");
  Canvas c;
  c.height = std::max(220, 80 + static_cast<int>(rows.size()) * 4);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path);
  detail::open_svg(out, c, title);
  double vmax = 0.0;
  for (const auto& r : rows)
    for (double v : r) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  const double cell_w = static_cast<double>(c.plot_w()) / static_cast<double>(T);
  const double cell_h = static_cast<double>(c.plot_h()) / static_cast<double>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t t = 0; t < T; ++t) {
      const double v = rows[r][t] / vmax;  // [-1, 1]
      int red, green, blue;
      if (v >= 0) {
        red = 255;
        green = blue = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      } else {
        blue = 255;
        red = green = static_cast<int>(std::lround(255.0 * (1.0 + v)));
      }
      out << "<rect x=\"" << c.left + cell_w * static_cast<double>(t) << "\" y=\""
          << c.top + cell_h * static_cast<double>(r) << "\" width=\"" << cell_w + 0.5
          << "\" height=\"" << cell_h + 0.5 << "\" fill=\"rgb(" << red << "," << green
          << "," << blue << ")\"/>\n";
    }
  }
  out << "<text class=\"label\" x=\"" << c.left + c.plot_w() / 2 << "\" y=\""
      << c.height - 8 << "\" text-anchor=\"middle\">time step</text>\n";
  out << "<text class=\"label\" x=\"16\" y=\"" << c.top + c.plot_h() / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << c.top + c.plot_h() / 2 << ")\">cell</text>\n";
  detail::close_svg(out);
  require(static_cast<bool>(out), "failed writing " + path);
}

// Ablation impact against cells ranked by one response metric: raw impacts
// as dots, a centered moving-average trend line, and the ranked metric
// itself overlaid in gray on a secondary scale.
inline void write_ablation_svg(const Vec& impacts_by_rank, const Vec& metric_by_rank,
                               std::size_t ma_window, const std::string& title,
                               const std::string& path) {
  require(!impacts_by_rank.empty(), "write_ablation_svg: empty impacts");
  require(impacts_by_rank.size() == metric_by_rank.size(),
          "write_ablation_svg: impact/metric length mismatch");
  Canvas c;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path);
  detail::open_svg(out, c, title);
  double lo, hi;
  detail::span_bounds(impacts_by_rank, lo, hi);
  const double xmax = static_cast<double>(impacts_by_rank.size() - 1);
  detail::axes(out, c, 0.0, std::max(xmax, 1.0), lo, hi, "cell rank (by metric)",
               "ablation impact");

  // Metric overlay rescaled into the impact axis range.
  double mlo = *std::min_element(metric_by_rank.begin(), metric_by_rank.end());
  double mhi = *std::max_element(metric_by_rank.begin(), metric_by_rank.end());
  if (mhi == mlo) mhi = mlo + 1.0;
  std::vector<std::pair<double, double>> metric_pts;
  for (std::size_t i = 0; i < metric_by_rank.size(); ++i)
    metric_pts.push_back({static_cast<double>(i),
                          lo + (metric_by_rank[i] - mlo) / (mhi - mlo) * (hi - lo)});
  detail::polyline(out, metric_pts, 0.0, std::max(xmax, 1.0), lo, hi, c, "#999999", 1.5);

  for (std::size_t i = 0; i < impacts_by_rank.size(); ++i) {
    out << "<circle cx=\"" << detail::map_x(static_cast<double>(i), 0.0, std::max(xmax, 1.0), c)
        << "\" cy=\"" << detail::map_y(impacts_by_rank[i], lo, hi, c)
        << "\" r=\"2\" fill=\"#9ecae1\"/>\n";
  }
  const Vec smooth = moving_average(impacts_by_rank, ma_window);
  std::vector<std::pair<double, double>> trend;
  for (std::size_t i = 0; i < smooth.size(); ++i)
    trend.push_back({static_cast<double>(i), smooth[i]});
  detail::polyline(out, trend, 0.0, std::max(xmax, 1.0), lo, hi, c, "#1f4e9c", 2.0);
  detail::close_svg(out);
  require(static_cast<bool>(out), "failed writing " + path);
}

// Mean ± std of one metric as a function of network size.
inline void write_capacity_svg(const std::vector<std::size_t>& sizes, const Vec& means,
                               const Vec& stds, const std::string& title,
                               const std::string& ylabel, const std::string& path) {
  require(!sizes.empty(), "write_capacity_svg: empty sweep");
  require(sizes.size() == means.size() && sizes.size() == stds.size(),
          "write_capacity_svg: length mismatch");
  Canvas c;
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open output file for writing: " + path);
  detail::open_svg(out, c, title);
  Vec bounds;
  for (std::size_t i = 0; i < means.size(); ++i) {
    bounds.push_back(means[i] - stds[i]);
    bounds.push_back(means[i] + stds[i]);
  }
  double lo, hi;
  detail::span_bounds(bounds, lo, hi);
  const double xmin = static_cast<double>(sizes.front());
  const double xmax = static_cast<double>(sizes.back());
  detail::axes(out, c, xmin, std::max(xmax, xmin + 1.0), lo, hi, "network size N", ylabel,
               static_cast<int>(sizes.size() - 1 ? sizes.size() - 1 : 1));
  std::vector<std::pair<double, double>> line;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double x = static_cast<double>(sizes[i]);
    line.push_back({x, means[i]});
    const double px = detail::map_x(x, xmin, std::max(xmax, xmin + 1.0), c);
    out << "<line class=\"axis\" x1=\"" << px << "\" y1=\""
        << detail::map_y(means[i] - stds[i], lo, hi, c) << "\" x2=\"" << px << "\" y2=\""
        << detail::map_y(means[i] + stds[i], lo, hi, c) << "\" stroke=\"#888\"/>\n";
  }
  detail::polyline(out, line, xmin, std::max(xmax, xmin + 1.0), lo, hi, c, "#1f4e9c", 2.0);
  for (const auto& [x, y] : line)
    out << "<circle cx=\"" << detail::map_x(x, xmin, std::max(xmax, xmin + 1.0), c)
        << "\" cy=\"" << detail::map_y(y, lo, hi, c) << "\" r=\"3\" fill=\"#1f4e9c\"/>\n";
  detail::close_svg(out);
  require(static_cast<bool>(out), "failed writing " + path);
}

}  // namespace svg
}  // namespace lstmscope
