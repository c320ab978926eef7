#pragma once

#include <string>
#include <vector>

#include "lcl/report.hpp"

namespace lcl {

// Self-contained SVG bar chart; byte output is a pure function of the
// arguments.
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values);

// One chart file per metric column with at least one populated cell; empty
// columns are skipped with a stderr warning. Returns the paths written.
std::vector<std::string> write_metric_charts(const Report& r, const std::string& out_dir);

}  // namespace lcl
