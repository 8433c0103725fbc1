#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace stratlab::harness {

/// Creates `dir` and its parents; throws ConfigError if that fails.
void ensure_directory(const std::string& dir);

/// Pretty-printed JSON followed by a newline.
void write_json(const std::string& path, const nlohmann::json& j);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Draw markers only.
  bool points = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Keep the aspect ratio of the data (used for curve atlases).
  bool equal_axes = false;
  /// Explicit data window; ignored when lo >= hi.
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
};

/// Plain SVG line plot with axes, tick labels and a legend. Non-finite points
/// (and non-positive ones on log axes) break the polyline.
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series,
                    const PlotOptions& options);

}  // namespace stratlab::harness
