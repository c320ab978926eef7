#include "lcl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "lcl/errors.hpp"
#include "lcl/io.hpp"

namespace lcl {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values) {
    if (labels.size() != values.size()) throw ContractViolation("svg_bar_chart: labels and values must align");
    if (values.empty()) throw ContractViolation("svg_bar_chart: nothing to draw");

    const double width = 720, height = 400;
    const double left = 60, right = 20, top = 50, bottom = 90;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    double vmax = 0;
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericalError("svg_bar_chart: non-finite value");
        vmax = std::max(vmax, v);
    }
    if (vmax <= 0) vmax = 1.0;

    const double n = static_cast<double>(values.size());
    const double slot = plot_w / n;
    const double bar_w = slot * 0.6;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
    s << "<rect width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(width / 2) << "\" y=\"24\" font-family=\"monospace\" font-size=\"16\" "
      << "text-anchor=\"middle\">" << escape_xml(title) << "</text>\n";
    // axes
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(top + plot_h) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(left + plot_w)
      << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + 4) << "\" font-family=\"monospace\" "
      << "font-size=\"11\" text-anchor=\"end\">" << num(vmax) << "</text>\n";
    s << "<text x=\"" << num(left - 8) << "\" y=\"" << num(top + plot_h + 4) << "\" font-family=\"monospace\" "
      << "font-size=\"11\" text-anchor=\"end\">0</text>\n";

    for (size_t i = 0; i < values.size(); ++i) {
        const double h = plot_h * values[i] / vmax;
        const double x = left + slot * static_cast<double>(i) + (slot - bar_w) / 2;
        const double y = top + plot_h - h;
        s << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h)
          << "\" fill=\"#4878a8\"/>\n";
        s << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(y - 4) << "\" font-family=\"monospace\" "
          << "font-size=\"10\" text-anchor=\"middle\">" << num(values[i]) << "</text>\n";
        s << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(top + plot_h + 14)
          << "\" font-family=\"monospace\" font-size=\"9\" text-anchor=\"end\" transform=\"rotate(-45 "
          << num(x + bar_w / 2) << " " << num(top + plot_h + 14) << ")\">" << escape_xml(labels[i]) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::vector<std::string> write_metric_charts(const Report& r, const std::string& out_dir) {
    std::vector<std::string> written;
    for (const auto& col : r.columns) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const auto& row : r.rows) {
            if (row.absent || !row.cell.values.count(col)) continue;
            labels.push_back(row.variant + "/" + row.conditioning);
            values.push_back(row.cell.at(col).mean);
        }
        if (values.empty()) {
            std::cerr << "[plot] metric '" << col << "' has no populated cells, chart skipped\n";
            continue;
        }
        const std::string path = out_dir + "/plot_" + col + ".svg";
        write_text_file(path, svg_bar_chart(col, labels, values));
        written.push_back(path);
    }
    return written;
}

}  // namespace lcl
