#include "flyinv/errors.hpp"
#include "flyinv/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace flyinv {

namespace {

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << to_string(r.filter_kind) << ',' << g6(r.r1_ohm) << ',' << g6(r.p_target_w) << ','
            << g6(r.p_in_w) << ',' << g6(r.p_out_w) << ',' << g6(r.efficiency) << ','
            << g6(r.thd_pct) << ',' << g6(r.i1_rms_a) << ',' << g6(r.mod_index) << ','
            << (r.compliant ? "true" : "false") << '\n';
    }
}

void write_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_csv(rows, out);
    out.flush();
    if (!out) {
        throw IoError("write failed on " + path.string());
    }
}

std::vector<ReportRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw IoError("report CSV: unexpected header");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            cells.push_back(cell);
        }
        if (cells.size() != 10) {
            throw IoError("report CSV: expected 10 fields, got " + std::to_string(cells.size()));
        }
        auto num = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
        ReportRow r;
        r.filter_kind = parse_filter_kind(cells[0]);
        r.r1_ohm = num(cells[1]);
        r.p_target_w = num(cells[2]);
        r.p_in_w = num(cells[3]);
        r.p_out_w = num(cells[4]);
        r.efficiency = num(cells[5]);
        r.thd_pct = num(cells[6]);
        r.i1_rms_a = num(cells[7]);
        r.mod_index = num(cells[8]);
        if (cells[9] != "true" && cells[9] != "false") {
            throw IoError("report CSV: compliant must be true or false");
        }
        r.compliant = cells[9] == "true";
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace flyinv
