#include "stratlab/harness/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "stratlab/core/error.hpp"

namespace stratlab::harness {

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

namespace {

constexpr double kWidth = 640.0, kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 150.0, kTop = 40.0, kBottom = 50.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                               "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char ch : s) {
    switch (ch) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      default: o += ch;
    }
  }
  return o;
}

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis make_axis(const std::vector<PlotSeries>& s, bool use_x, bool log, double lo_in, double hi_in) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  if (lo_in < hi_in) {
    lo = lo_in;
    hi = hi_in;
  } else {
    for (const auto& ser : s) {
      for (double v : use_x ? ser.x : ser.y) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!std::isfinite(lo)) lo = log ? 1.0 : 0.0, hi = log ? 10.0 : 1.0;
  if (log) {
    lo = std::floor(std::log10(lo));
    hi = std::ceil(std::log10(hi));
    if (hi <= lo) hi = lo + 1.0;
  } else {
    if (hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, const PlotOptions& o) {
  Axis ax = make_axis(series, true, o.log_x, o.x_lo, o.x_hi);
  Axis ay = make_axis(series, false, o.log_y, o.y_lo, o.y_hi);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  if (o.equal_axes && !o.log_x && !o.log_y) {
    const double sx = (ax.hi - ax.lo) / (x1 - x0), sy = (ay.hi - ay.lo) / (y0 - y1);
    if (sx > sy) {
      const double mid = 0.5 * (ay.lo + ay.hi), half = 0.5 * sx * (y0 - y1);
      ay.lo = mid - half;
      ay.hi = mid + half;
    } else {
      const double mid = 0.5 * (ax.lo + ax.hi), half = 0.5 * sy * (x1 - x0);
      ax.lo = mid - half;
      ax.hi = mid + half;
    }
  }

  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << 0.5 * (x0 + x1) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(o.title) << "</text>\n";
  out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  const auto ticks = [](const Axis& a) {
    std::vector<double> t;
    if (a.log) {
      for (double e = a.lo; e <= a.hi + 1e-9; e += 1.0) t.push_back(e);
    } else {
      for (int k = 0; k <= 5; ++k) t.push_back(a.lo + (a.hi - a.lo) * k / 5.0);
    }
    return t;
  };
  for (double t : ticks(ax)) {
    const double v = ax.log ? std::pow(10.0, t) : t;
    const double px = ax.log ? x0 + (t - ax.lo) / (ax.hi - ax.lo) * (x1 - x0) : ax.map(v, x0, x1);
    out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y0 + 5
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << num(v) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double v = ay.log ? std::pow(10.0, t) : t;
    const double py = ay.log ? y0 + (t - ay.lo) / (ay.hi - ay.lo) * (y1 - y0) : ay.map(v, y0, y1);
    out << "<line x1=\"" << x0 - 5 << "\" y1=\"" << py << "\" x2=\"" << x0 << "\" y2=\"" << py
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x0 - 8 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  out << "<text x=\"" << 0.5 * (x0 + x1) << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
      << escape(o.x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << 0.5 * (y0 + y1) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(o.y_label) << "</text>\n";

  out << "<defs><clipPath id=\"plot\"><rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0
      << "\" height=\"" << y0 - y1 << "\"/></clipPath></defs>\n<g clip-path=\"url(#plot)\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    std::string pts;
    const auto flush = [&] {
      if (!pts.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
            << "\"/>\n";
      }
      pts.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) {
        flush();
        continue;
      }
      const double px = ax.map(s.x[i], x0, x1), py = ay.map(s.y[i], y0, y1);
      if (s.points) {
        out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      } else {
        pts += num(px) + "," + num(py) + " ";
      }
    }
    flush();
  }
  out << "</g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double ly = y1 + 14.0 + 16.0 * static_cast<double>(k);
    out << "<rect x=\"" << x1 + 10 << "\" y=\"" << ly - 8 << "\" width=\"12\" height=\"3\" fill=\""
        << kColors[k % (sizeof kColors / sizeof *kColors)] << "\"/>\n";
    out << "<text x=\"" << x1 + 28 << "\" y=\"" << ly - 3 << "\">" << escape(series[k].name) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace stratlab::harness
