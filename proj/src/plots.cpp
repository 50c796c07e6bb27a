#include "flyinv/errors.hpp"
#include "flyinv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace flyinv {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Range {
    double lo;
    double hi;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(std::abs(lo) * 0.05, 1e-3);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.08 * (hi - lo);
    return {lo - pad, hi + pad};
}

class Canvas {
public:
    Canvas(std::string title, std::string x_label, std::string y_label, Range x, Range y)
        : x_(x), y_(y) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
             << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
             << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
             << title << "</text>\n"
             << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << kHeight - 15
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label << "</text>\n"
             << "<text x=\"18\" y=\"" << kTop + plot_h() / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 "
             << kTop + plot_h() / 2 << ")\">" << y_label << "</text>\n"
             << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w() << "\" height=\""
             << plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double yv = y_.lo + (y_.hi - y_.lo) * i / 4.0;
            out_ << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4
                 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << fmt("%.4g", yv)
                 << "</text>\n";
        }
    }

    double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
    double py(double y) const { return kTop + (y_.hi - y) / (y_.hi - y_.lo) * plot_h(); }
    static double plot_w() { return kWidth - kLeft - kRight; }
    static double plot_h() { return kHeight - kTop - kBottom; }

    void x_tick(double x, const std::string& label) {
        out_ << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h() + 16
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << label << "</text>\n";
    }

    void legend(int index, const std::string& color, const std::string& label) {
        const double y = kTop + 14.0 + 18.0 * index;
        const double x = kWidth - kRight + 14.0;
        out_ << "<rect x=\"" << x << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\"" << color
             << "\"/>\n<text x=\"" << x + 18 << "\" y=\"" << y + 1
             << "\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    }

    std::ostringstream& raw() { return out_; }

    void save(const std::filesystem::path& path) {
        out_ << "</svg>\n";
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw IoError("cannot open " + path.string() + " for writing");
        }
        f << out_.str();
        if (!f) {
            throw IoError("write failed on " + path.string());
        }
    }

private:
    Range x_;
    Range y_;
    std::ostringstream out_;
};

bool usable(const ReportRow& r) {
    return !r.failed() && std::isfinite(r.efficiency) && std::isfinite(r.thd_pct) &&
           std::isfinite(r.p_out_w);
}

void efficiency_plot(const std::vector<const ReportRow*>& rows, FilterKind kind,
                     const std::filesystem::path& path) {
    std::map<double, std::vector<const ReportRow*>> by_r1;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto* r : rows) {
        by_r1[r->r1_ohm].push_back(r);
        x_lo = std::min(x_lo, r->p_out_w);
        x_hi = std::max(x_hi, r->p_out_w);
        y_lo = std::min(y_lo, r->efficiency);
        y_hi = std::max(y_hi, r->efficiency);
    }
    Canvas canvas("Efficiency vs output power, " + std::string(to_string(kind)) + " filter",
                  "output power (W)", "efficiency", padded(x_lo, x_hi), padded(y_lo, y_hi));
    for (double p : {x_lo, x_hi}) {
        canvas.x_tick(p, fmt("%.4g", p));
    }
    int index = 0;
    for (auto& [r1, pts] : by_r1) {
        std::sort(pts.begin(), pts.end(),
                  [](const ReportRow* a, const ReportRow* b) { return a->p_out_w < b->p_out_w; });
        const std::string color = kPalette[index % std::size(kPalette)];
        auto& out = canvas.raw();
        out << "<polyline class=\"curve\" data-filter=\"" << to_string(kind) << "\" data-r1=\""
            << fmt("%.6g", r1) << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto* r : pts) {
            out << fmt("%.2f", canvas.px(r->p_out_w)) << ',' << fmt("%.2f", canvas.py(r->efficiency)) << ' ';
        }
        out << "\"/>\n";
        for (const auto* r : pts) {
            out << "<circle cx=\"" << fmt("%.2f", canvas.px(r->p_out_w)) << "\" cy=\""
                << fmt("%.2f", canvas.py(r->efficiency)) << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        }
        canvas.legend(index, color, "r1 = " + fmt("%.4g", r1) + " Ω");
        ++index;
    }
    canvas.save(path);
}

void thd_plot(const std::vector<const ReportRow*>& rows, const std::filesystem::path& path) {
    double y_hi = 5.0;
    for (const auto* r : rows) {
        y_hi = std::max(y_hi, r->thd_pct);
    }
    const auto n = static_cast<double>(rows.size());
    Canvas canvas("Grid-current THD per sweep point", "filter / r1 (ohm) / power (W)", "THD (%)",
                  {0.0, n}, {0.0, y_hi * 1.1});
    auto& out = canvas.raw();
    const double limit_y = canvas.py(5.0);
    out << "<line class=\"limit\" x1=\"" << kLeft << "\" y1=\"" << fmt("%.2f", limit_y) << "\" x2=\""
        << kLeft + Canvas::plot_w() << "\" y2=\"" << fmt("%.2f", limit_y)
        << "\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n";
    std::map<FilterKind, int> colors;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto* r = rows[i];
        const auto [it, inserted] = colors.emplace(r->filter_kind, static_cast<int>(colors.size()));
        const std::string color = kPalette[it->second % std::size(kPalette)];
        if (inserted) {
            canvas.legend(it->second, color, std::string(to_string(r->filter_kind)));
        }
        const double x0 = canvas.px(static_cast<double>(i) + 0.15);
        const double x1 = canvas.px(static_cast<double>(i) + 0.85);
        const double y = canvas.py(r->thd_pct);
        out << "<rect class=\"bar\" data-filter=\"" << to_string(r->filter_kind) << "\" data-r1=\""
            << fmt("%.6g", r->r1_ohm) << "\" data-power=\"" << fmt("%.6g", r->p_target_w)
            << "\" x=\"" << fmt("%.2f", x0) << "\" y=\"" << fmt("%.2f", y) << "\" width=\""
            << fmt("%.2f", x1 - x0) << "\" height=\"" << fmt("%.2f", canvas.py(0.0) - y)
            << "\" fill=\"" << color << "\"/>\n";
    }
    canvas.legend(static_cast<int>(colors.size()), "black", "5 % limit");
    canvas.save(path);
}

}  // namespace

std::vector<std::filesystem::path> render_plots(const std::vector<ReportRow>& rows,
                                                const std::filesystem::path& dir) {
    std::vector<const ReportRow*> good;
    for (const auto& r : rows) {
        if (usable(r)) {
            good.push_back(&r);
        }
    }
    if (good.empty()) {
        throw PreconditionError("render_plots: no successful rows to plot");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }

    std::vector<std::filesystem::path> written;
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        std::vector<const ReportRow*> subset;
        std::copy_if(good.begin(), good.end(), std::back_inserter(subset),
                     [kind](const ReportRow* r) { return r->filter_kind == kind; });
        if (subset.empty()) {
            continue;
        }
        auto path = dir / ("efficiency_" + std::string(kind == FilterKind::CL ? "cl" : "lcl") + ".svg");
        efficiency_plot(subset, kind, path);
        written.push_back(path);
    }
    auto path = dir / "thd.svg";
    thd_plot(good, path);
    written.push_back(path);
    return written;
}

}  // namespace flyinv
