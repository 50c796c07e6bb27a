#pragma once

#include <array>
#include <string_view>

namespace flyinv {

enum class FilterKind { CL, LCL };

std::string_view to_string(FilterKind kind) noexcept;
/// Accepts "cl"/"lcl" in any case; throws ConfigError otherwise.
FilterKind parse_filter_kind(std::string_view text);

/// Converter-side shunt C, grid-side series L.
struct ClFilter {
    double l = 5e-3;
    double c = 200e-9;
    double r_series = 0.1;

    bool operator==(const ClFilter&) const = default;
};

/// Converter-side interface capacitance c_s, then L_i, shunt C_f, L_g.
/// c_s is the voltage node the flyback secondary discharges into.
struct LclFilter {
    double l_i = 4.5e-3;
    double l_g = 12e-3;
    double c_f = 100e-9;
    double c_s = 50e-9;
    double r_series = 0.1;

    bool operator==(const LclFilter&) const = default;
};

/// Both filter variants travel together so one configuration can drive
/// either; `kind` selects the one in use.
struct FilterParams {
    FilterKind kind = FilterKind::CL;
    ClFilter cl;
    LclFilter lcl;

    double r_series() const noexcept { return kind == FilterKind::CL ? cl.r_series : lcl.r_series; }
    void validate() const;
    bool operator==(const FilterParams&) const = default;
};

struct GridParams {
    double v_g_amp = 325.0;
    double f0 = 50.0;

    void validate() const;
    double voltage(double t) const noexcept;
    bool operator==(const GridParams&) const = default;
};

/// CL:  x = (v_c, i_l, -, -)
/// LCL: x = (v_a, i_li, v_cf, i_lg)
/// Unused slots stay zero.
struct FilterState {
    FilterKind kind = FilterKind::CL;
    std::array<double, 4> x{};

    static constexpr int size(FilterKind kind) noexcept { return kind == FilterKind::CL ? 2 : 4; }

    /// Voltage the converter secondary sees (v_c or v_a).
    double node_voltage() const noexcept { return x[0]; }
    /// Current into the grid (i_l or i_lg).
    double grid_current() const noexcept { return kind == FilterKind::CL ? x[1] : x[3]; }

    /// 1/2 (sum L i^2 + sum C v^2).
    double stored_energy(const FilterParams& fp) const noexcept;
    /// Sum of i^2 * r_series over the inductors.
    double resistive_loss(const FilterParams& fp) const noexcept;
};

/// State derivative of the filter for injected current i_inj and grid
/// voltage v_grid. Throws PreconditionError when fs.kind != fp.kind.
FilterState filter_derivative(const FilterState& fs, double i_inj, double v_grid,
                              const FilterParams& fp);

/// Lossless |i_grid / i_inj| at frequency f (Hz) with the grid as a short.
/// Returns +infinity at an undamped pole.
double transfer_magnitude(const FilterParams& fp, double f);

/// CL: 1/(2 pi sqrt(l c)). LCL: converter-side-shorted resonance
/// (1/2 pi) sqrt((l_i + l_g) / (l_i l_g c_f)).
double resonance_frequency(const FilterParams& fp);

}  // namespace flyinv
