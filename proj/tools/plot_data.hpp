#pragma once

#include <string>
#include <vector>

namespace plot {

struct Column {
  std::string name;
  std::vector<double> values;
};

// Comma-separated columns, one '#' header comment line, %.17g numbers, LF newlines.
void write_csv(const std::string& path, const std::string& comment, const std::vector<Column>& columns);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Polyline plot with axes and tick labels.
void write_svg(const std::string& path, const std::string& comment, const std::string& title,
               const std::string& xlabel, const std::string& ylabel, const std::vector<Series>& series);

}  // namespace plot
