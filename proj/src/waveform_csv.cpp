#include "flyinv/errors.hpp"
#include "flyinv/signal.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace flyinv {

namespace {

double parse_double(std::string_view field, const std::filesystem::path& path, int line) {
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                      std::string(field) + "'");
    }
    return value;
}

}  // namespace

void write_waveform_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "t_s,value\n";
    char buf[64];
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ts.time(k), ts[k]);
        out.write(buf, len);
    }
    if (!out) {
        throw IoError("write failed on " + path.string());
    }
}

TimeSeries read_waveform_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "t_s,value") {
        throw IoError(path.string() + ": expected header 't_s,value'");
    }
    std::vector<double> times;
    std::vector<double> values;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": missing ','");
        }
        std::string_view sv(line);
        times.push_back(parse_double(sv.substr(0, comma), path, lineno));
        values.push_back(parse_double(sv.substr(comma + 1), path, lineno));
    }
    if (times.size() < 2) {
        throw IoError(path.string() + ": need at least two samples to infer the sample period");
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-6 * dt) {
            throw IoError(path.string() + ": non-uniform sampling near row " + std::to_string(k + 1));
        }
    }
    return TimeSeries(std::move(values), dt, times.front());
}

}  // namespace flyinv
