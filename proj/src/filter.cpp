#include "flyinv/filter.hpp"

#include "flyinv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace flyinv {

std::string_view to_string(FilterKind kind) noexcept {
    return kind == FilterKind::CL ? "CL" : "LCL";
}

FilterKind parse_filter_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "cl") {
        return FilterKind::CL;
    }
    if (lower == "lcl") {
        return FilterKind::LCL;
    }
    throw ConfigError("unknown filter kind '" + std::string(text) + "' (expected cl or lcl)");
}

void FilterParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw ConfigError(std::string(name) + " must be > 0");
        }
    };
    positive(cl.l, "l");
    positive(cl.c, "c");
    if (!(cl.r_series >= 0.0)) {
        throw ConfigError("filter.cl r_series must be >= 0");
    }
    positive(lcl.l_i, "l_i");
    positive(lcl.l_g, "l_g");
    positive(lcl.c_f, "c_f");
    positive(lcl.c_s, "c_s");
    if (lcl.c_s > 0.5 * lcl.c_f) {
        throw ConfigError("c_s must not exceed c_f/2");
    }
    if (!(lcl.r_series >= 0.0)) {
        throw ConfigError("filter.lcl r_series must be >= 0");
    }
}

void GridParams::validate() const {
    if (!(v_g_amp > 0.0)) {
        throw ConfigError("v_g_amp must be > 0");
    }
    if (!(f0 > 0.0)) {
        throw ConfigError("f0 must be > 0");
    }
}

double GridParams::voltage(double t) const noexcept {
    return v_g_amp * std::sin(2.0 * std::numbers::pi * f0 * t);
}

double FilterState::stored_energy(const FilterParams& fp) const noexcept {
    if (kind == FilterKind::CL) {
        return 0.5 * (fp.cl.c * x[0] * x[0] + fp.cl.l * x[1] * x[1]);
    }
    const auto& p = fp.lcl;
    return 0.5 * (p.c_s * x[0] * x[0] + p.l_i * x[1] * x[1] + p.c_f * x[2] * x[2] +
                  p.l_g * x[3] * x[3]);
}

double FilterState::resistive_loss(const FilterParams& fp) const noexcept {
    if (kind == FilterKind::CL) {
        return fp.cl.r_series * x[1] * x[1];
    }
    return fp.lcl.r_series * (x[1] * x[1] + x[3] * x[3]);
}

FilterState filter_derivative(const FilterState& fs, double i_inj, double v_grid,
                              const FilterParams& fp) {
    if (fs.kind != fp.kind) {
        throw PreconditionError("filter_derivative: state is " + std::string(to_string(fs.kind)) +
                                " but parameters are " + std::string(to_string(fp.kind)));
    }
    FilterState d{fs.kind, {}};
    const auto& x = fs.x;
    if (fs.kind == FilterKind::CL) {
        const auto& p = fp.cl;
        d.x[0] = (i_inj - x[1]) / p.c;
        d.x[1] = (x[0] - v_grid - p.r_series * x[1]) / p.l;
    } else {
        const auto& p = fp.lcl;
        d.x[0] = (i_inj - x[1]) / p.c_s;
        d.x[1] = (x[0] - x[2] - p.r_series * x[1]) / p.l_i;
        d.x[2] = (x[1] - x[3]) / p.c_f;
        d.x[3] = (x[2] - v_grid - p.r_series * x[3]) / p.l_g;
    }
    return d;
}

double transfer_magnitude(const FilterParams& fp, double f) {
    if (!(f > 0.0)) {
        throw PreconditionError("transfer_magnitude: frequency must be positive");
    }
    const double w2 = std::pow(2.0 * std::numbers::pi * f, 2);
    double denom = 0.0;
    if (fp.kind == FilterKind::CL) {
        denom = 1.0 - w2 * fp.cl.l * fp.cl.c;
    } else {
        // Current source into c_s, ladder c_s | l_i | c_f | l_g into a shorted grid:
        //   i_g / i_inj = 1 / ((1 - w^2 l_g c_f)(1 - w^2 l_i c_s) - w^2 l_g c_s)
        // With c_s -> 0 this is the current divider 1 / (1 - w^2 l_g c_f).
        const auto& p = fp.lcl;
        denom = (1.0 - w2 * p.l_g * p.c_f) * (1.0 - w2 * p.l_i * p.c_s) - w2 * p.l_g * p.c_s;
    }
    if (std::abs(denom) <= 1e-12) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / std::abs(denom);
}

double resonance_frequency(const FilterParams& fp) {
    if (fp.kind == FilterKind::CL) {
        return 1.0 / (2.0 * std::numbers::pi * std::sqrt(fp.cl.l * fp.cl.c));
    }
    const auto& p = fp.lcl;
    return std::sqrt((p.l_i + p.l_g) / (p.l_i * p.l_g * p.c_f)) / (2.0 * std::numbers::pi);
}

}  // namespace flyinv
