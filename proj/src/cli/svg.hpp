#pragma once

#include <string>
#include <vector>

namespace abdiv::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log line plot; points with non-positive coordinates are skipped.
std::string log_log_svg(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<Series>& series);

}  // namespace abdiv::cli
