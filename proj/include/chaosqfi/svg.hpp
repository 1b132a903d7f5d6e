#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace chaosqfi::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Axes {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0 = 70, y0 = 40, w = 520, h = 340;
  double xmin, xmax, ymin, ymax;
  bool log_x, log_y;

  double tx(double v) const { return log_x ? std::log10(v) : v; }
  double ty(double v) const { return log_y ? std::log10(v) : v; }
  double px(double v) const { return x0 + (tx(v) - xmin) / (xmax - xmin) * w; }
  double py(double v) const { return y0 + h - (ty(v) - ymin) / (ymax - ymin) * h; }
};

inline void header(std::ostream& os, double width, double height) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void frame_decor(std::ostream& os, const Frame& f, const Axes& ax) {
  os << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\"" << f.h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xmin + (f.xmax - f.xmin) * i / 4, yv = f.ymin + (f.ymax - f.ymin) * i / 4;
    const double px = f.x0 + f.w * i / 4, py = f.y0 + f.h - f.h * i / 4;
    os << "<text x=\"" << px << "\" y=\"" << f.y0 + f.h + 16 << "\" text-anchor=\"middle\">"
       << num(f.log_x ? std::pow(10.0, xv) : xv) << "</text>\n";
    os << "<text x=\"" << f.x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
       << num(f.log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(ax.title)
     << "</text>\n";
  os << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"" << f.y0 + f.h + 36 << "\" text-anchor=\"middle\">"
     << escape(ax.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << f.y0 + f.h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << f.y0 + f.h / 2 << ")\">" << escape(ax.ylabel) << "</text>\n";
}

inline bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace detail

/// Line plot of several series with a legend.
inline void line_plot(std::ostream& os, const std::vector<Series>& series, const Axes& ax) {
  detail::Frame f{};
  f.log_x = ax.log_x;
  f.log_y = ax.log_y;
  f.xmin = f.ymin = std::numeric_limits<double>::infinity();
  f.xmax = f.ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!detail::usable(s.x[i], f.log_x) || !detail::usable(s.y[i], f.log_y)) continue;
      f.xmin = std::min(f.xmin, f.tx(s.x[i]));
      f.xmax = std::max(f.xmax, f.tx(s.x[i]));
      f.ymin = std::min(f.ymin, f.ty(s.y[i]));
      f.ymax = std::max(f.ymax, f.ty(s.y[i]));
    }
  if (!(f.xmax > f.xmin)) f.xmin -= 0.5, f.xmax = f.xmin + 1.0;
  if (!(f.ymax > f.ymin)) f.ymin -= 0.5, f.ymax = f.ymin + 1.0;
  detail::header(os, 720, 430);
  detail::frame_decor(os, f, ax);
  double legend_y = f.y0 + 10;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\""
       << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!detail::usable(s.x[i], f.log_x) || !detail::usable(s.y[i], f.log_y)) continue;
      os << detail::num(f.px(s.x[i])) << ',' << detail::num(f.py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    os << "<line x1=\"" << f.x0 + f.w + 10 << "\" y1=\"" << legend_y << "\" x2=\"" << f.x0 + f.w + 30 << "\" y2=\""
       << legend_y << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << f.x0 + f.w + 34 << "\" y=\"" << legend_y + 4 << "\">" << detail::escape(s.label)
       << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";
}

/// Histogram bars (density) with an overlaid reference curve.
inline void histogram_plot(std::ostream& os, const std::vector<double>& left, const std::vector<double>& right,
                           const std::vector<double>& density, const std::vector<double>& reference,
                           const std::string& reference_label, const Axes& ax) {
  detail::Frame f{};
  f.log_x = f.log_y = false;
  f.xmin = left.empty() ? 0.0 : left.front();
  f.xmax = right.empty() ? 1.0 : right.back();
  f.ymin = 0.0;
  f.ymax = 0.0;
  for (double d : density) f.ymax = std::max(f.ymax, d);
  for (double d : reference) f.ymax = std::max(f.ymax, d);
  f.ymax = f.ymax > 0.0 ? 1.1 * f.ymax : 1.0;
  detail::header(os, 720, 430);
  detail::frame_decor(os, f, ax);
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double x = f.px(left[i]), w = f.px(right[i]) - x, y = f.py(density[i]);
    os << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(y) << "\" width=\"" << detail::num(w)
       << "\" height=\"" << detail::num(f.y0 + f.h - y) << "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < reference.size(); ++i)
    os << detail::num(f.px(0.5 * (left[i] + right[i]))) << ',' << detail::num(f.py(reference[i])) << ' ';
  os << "\"/>\n";
  os << "<text x=\"" << f.x0 + f.w + 10 << "\" y=\"" << f.y0 + 14 << "\" fill=\"#d62728\">"
     << detail::escape(reference_label) << "</text>\n";
  os << "</svg>\n";
}

namespace detail {

/// Blue-white-red diverging colour for t in [-1, 1].
inline std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t >= 0) {
    r = 255;
    g = b = static_cast<int>(255 * (1 - t));
  } else {
    b = 255;
    r = g = static_cast<int>(255 * (1 + t));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

/// Heatmap of a rows x cols grid; rows run along y (top = first row).
/// Symmetric colour scale around zero when `diverging` is set.
inline void heatmap(std::ostream& os, const Eigen::MatrixXd& values, double x_lo, double x_hi, double y_lo,
                    double y_hi, const Axes& ax, bool diverging = true) {
  detail::Frame f{};
  f.log_x = f.log_y = false;
  f.xmin = x_lo;
  f.xmax = x_hi > x_lo ? x_hi : x_lo + 1.0;
  f.ymin = y_lo;
  f.ymax = y_hi > y_lo ? y_hi : y_lo + 1.0;
  detail::header(os, 720, 430);
  const double vmax = values.size() ? values.cwiseAbs().maxCoeff() : 1.0;
  const double vmin = values.size() ? values.minCoeff() : 0.0;
  const double cw = f.w / static_cast<double>(std::max<Eigen::Index>(1, values.cols()));
  const double ch = f.h / static_cast<double>(std::max<Eigen::Index>(1, values.rows()));
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      double t = 0.0;
      if (diverging) t = vmax > 0 ? v / vmax : 0.0;
      else t = values.maxCoeff() > vmin ? (v - vmin) / (values.maxCoeff() - vmin) : 0.0;
      os << "<rect x=\"" << detail::num(f.x0 + c * cw) << "\" y=\"" << detail::num(f.y0 + f.h - (r + 1) * ch)
         << "\" width=\"" << detail::num(cw + 0.3) << "\" height=\"" << detail::num(ch + 0.3) << "\" fill=\""
         << detail::diverging(t) << "\"/>\n";
    }
  detail::frame_decor(os, f, ax);
  os << "<text x=\"" << f.x0 + f.w + 10 << "\" y=\"" << f.y0 + 14 << "\">max " << detail::num(values.maxCoeff())
     << "</text>\n<text x=\"" << f.x0 + f.w + 10 << "\" y=\"" << f.y0 + 32 << "\">min " << detail::num(vmin)
     << "</text>\n";
  os << "</svg>\n";
}

}  // namespace chaosqfi::svg
