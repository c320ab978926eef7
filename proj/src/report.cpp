#include "lcl/report.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "lcl/errors.hpp"
#include "lcl/hash.hpp"

namespace lcl {

namespace {

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, size_t line_no, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw IoError("report csv line " + std::to_string(line_no) + ": malformed " + what + " '" + s + "'");
    return v;
}

std::string display_name(const std::string& col) {
    if (col == "kd") return "KD";
    if (col == "fad") return "FAD";
    if (col == "cov") return "Cov.";
    if (col == "den") return "Den.";
    if (col == "cs_aa") return "CS_AA";
    if (col == "cs_ta") return "CS_TA";
    if (col == "apa") return "APA";
    return col;
}

}  // namespace

std::string report_to_csv(const Report& r) {
    std::ostringstream out;
    out << "# config_hash=" << hash_hex(r.config_hash) << "\n";
    out << "variant,conditioning";
    for (const auto& c : r.columns) out << "," << c << "_mean," << c << "_std";
    out << "\n";
    for (const auto& row : r.rows) {
        out << row.variant << "," << row.conditioning;
        for (const auto& c : r.columns) {
            if (row.absent || !row.cell.values.count(c)) {
                out << ",,";
            } else {
                const auto& s = row.cell.at(c);
                out << "," << fmt_full(s.mean) << "," << fmt_full(s.stddev);
            }
        }
        out << "\n";
    }
    return out.str();
}

Report parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    Report r;

    if (!std::getline(in, line)) throw IoError("report csv line 1: empty input");
    ++line_no;
    const std::string prefix = "# config_hash=";
    if (line.rfind(prefix, 0) != 0) throw IoError("report csv line 1: missing config hash header");
    const std::string hex = line.substr(prefix.size());
    if (hex.empty() || hex.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw IoError("report csv line 1: bad config hash '" + hex + "'");
    r.config_hash = std::strtoull(hex.c_str(), nullptr, 16);

    if (!std::getline(in, line)) throw IoError("report csv line 2: missing column header");
    ++line_no;
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "variant" || header[1] != "conditioning" || header.size() % 2 != 0)
        throw IoError("report csv line 2: malformed column header");
    for (size_t i = 2; i < header.size(); i += 2) {
        const std::string& m = header[i];
        const std::string& s = header[i + 1];
        if (m.size() < 6 || m.substr(m.size() - 5) != "_mean")
            throw IoError("report csv line 2: expected *_mean column, got '" + m + "'");
        const std::string base = m.substr(0, m.size() - 5);
        if (s != base + "_std") throw IoError("report csv line 2: expected '" + base + "_std', got '" + s + "'");
        r.columns.push_back(base);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw IoError("report csv line " + std::to_string(line_no) + ": expected " +
                          std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        ReportRow row;
        row.variant = fields[0];
        row.conditioning = fields[1];
        bool any = false;
        for (size_t i = 0; i < r.columns.size(); ++i) {
            const std::string& mf = fields[2 + 2 * i];
            const std::string& sf = fields[3 + 2 * i];
            if (mf.empty() && sf.empty()) continue;
            if (mf.empty() || sf.empty())
                throw IoError("report csv line " + std::to_string(line_no) + ": half-empty cell for '" +
                              r.columns[i] + "'");
            MetricStat st;
            st.mean = parse_double(mf, line_no, r.columns[i] + "_mean");
            st.stddev = parse_double(sf, line_no, r.columns[i] + "_std");
            row.cell.set(r.columns[i], st);
            any = true;
        }
        row.absent = !any;
        r.rows.push_back(std::move(row));
    }
    return r;
}

std::string report_to_table(const Report& r) {
    std::vector<std::string> heads = {"Variant", "Conditioning"};
    for (const auto& c : r.columns) heads.push_back(display_name(c));

    std::vector<std::vector<std::string>> body;
    for (const auto& row : r.rows) {
        std::vector<std::string> cells = {row.variant, row.conditioning};
        for (const auto& c : r.columns) {
            if (row.absent || !row.cell.values.count(c))
                cells.push_back("-");
            else
                cells.push_back(fmt_short(row.cell.at(c).mean) + "+-" + fmt_short(row.cell.at(c).stddev));
        }
        body.push_back(std::move(cells));
    }

    std::vector<size_t> width(heads.size());
    for (size_t i = 0; i < heads.size(); ++i) width[i] = heads[i].size();
    for (const auto& row : body)
        for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    out << "config " << hash_hex(r.config_hash) << " (desk scale; compare rows, not published magnitudes)\n";
    auto emit = [&](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            out << cells[i] << std::string(width[i] - cells[i].size(), ' ');
            out << (i + 1 < cells.size() ? "  " : "");
        }
        out << "\n";
    };
    emit(heads);
    size_t total = 0;
    for (size_t i = 0; i < width.size(); ++i) total += width[i] + (i + 1 < width.size() ? 2 : 0);
    out << std::string(total, '-') << "\n";
    for (const auto& row : body) emit(row);
    return out.str();
}

}  // namespace lcl
