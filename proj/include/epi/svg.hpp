#pragma once

#include <string>
#include <vector>

#include "epi/analysis.hpp"

namespace epi::svg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Median line with nested 50/80/95% bands from a time-indexed summary table,
/// plus optional observed points.
std::string band_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const analysis::SummaryTable& table,
                      const std::vector<Point>& observed = {});

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

/// One box (quartiles, 1.5 IQR whiskers) per group.
std::string box_plot(const std::string& title, const std::string& y_label,
                     const std::vector<BoxGroup>& groups);

}  // namespace epi::svg
