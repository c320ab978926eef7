#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcl/metrics.hpp"

namespace lcl {

// One table row; bound rows use "-" as the conditioning marker. An absent
// row keeps its identity but carries no values (checkpoint was missing).
struct ReportRow {
    std::string variant;
    std::string conditioning;
    MetricCell cell;
    bool absent = false;
};

struct Report {
    uint64_t config_hash = 0;
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
};

std::string report_to_csv(const Report& r);

// Strict parser; every complaint names the 1-based line number.
Report parse_report_csv(const std::string& text);

// Fixed-width table for terminals, one metric per column pair.
std::string report_to_table(const Report& r);

}  // namespace lcl
