#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace spsc::plot {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  ///< points instead of a polyline
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Minimal standalone SVG line plot with axes, ticks and a legend.
void write_svg(std::ostream& os, const Figure& fig);
void write_svg(const std::filesystem::path& path, const Figure& fig);

/// Long-format CSV "series,x,y".
void write_csv(std::ostream& os, const Figure& fig);
void write_csv(const std::filesystem::path& path, const Figure& fig);

}  // namespace spsc::plot
