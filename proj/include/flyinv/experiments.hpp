#pragma once

#include "flyinv/simulator.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flyinv {

struct Scenario {
    SimConfig sim;
    std::vector<double> sweep_r1{0.06, 0.12, 0.24};
    std::vector<double> sweep_power{50.0, 75.0, 100.0, 125.0, 150.0};
    std::vector<FilterKind> filters{FilterKind::CL, FilterKind::LCL};
    int h_max = kDefaultHarmonicCeiling;
    bool strict = false;

    void validate() const;
    bool operator==(const Scenario&) const = default;
};

/// Parses the INI-style scenario format. Missing keys keep their defaults.
/// Throws ConfigError with the line number for syntax errors, with every
/// unknown key listed, or naming the key whose value breaks a constraint.
Scenario parse_config(std::string_view text);
Scenario load_config(const std::filesystem::path& path);
/// Inverse of parse_config; every key is written explicitly.
std::string serialize(const Scenario& scn);

/// Parses a number with an optional engineering suffix (m, u, n, k).
double parse_quantity(std::string_view text);

struct ReportRow {
    FilterKind filter_kind = FilterKind::CL;
    double r1_ohm = 0.0;
    double p_target_w = 0.0;
    double p_in_w = 0.0;
    double p_out_w = 0.0;
    double efficiency = 0.0;
    double thd_pct = 0.0;
    double i1_rms_a = 0.0;
    double mod_index = 0.0;
    bool compliant = false;
    // Not part of the CSV.
    double p_loss_w = 0.0;
    double audit_residual_w = 0.0;
    std::string error;  ///< non-empty when the point failed

    bool failed() const noexcept { return !error.empty(); }
};

/// THD below 5% (strict).
bool compliance_check(double thd_pct) noexcept;

/// Calibrates, simulates and evaluates one sweep point. Never throws for
/// numerical trouble; failures land in ReportRow::error.
ReportRow evaluate_point(const SimConfig& base, FilterKind kind, double r1, double power, int h_max);

/// filters x r1 x power, up to `jobs` points in flight. The returned rows are
/// in (filter, r1, power) order whatever the scheduling.
std::vector<ReportRow> run_sweep(const Scenario& scn, unsigned jobs = 1);

inline constexpr std::string_view kCsvHeader =
    "filter,r1_ohm,p_target_w,p_in_w,p_out_w,efficiency,thd_pct,i1_rms_a,mod_index,compliant";

void write_csv(const std::vector<ReportRow>& rows, std::ostream& out);
void write_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
/// Reads back what write_csv produced (failed rows come back with NaN fields).
std::vector<ReportRow> read_csv(std::istream& in);

/// Writes efficiency_<filter>.svg per filter present and thd.svg. Returns the
/// paths written.
std::vector<std::filesystem::path> render_plots(const std::vector<ReportRow>& rows,
                                                const std::filesystem::path& dir);

}  // namespace flyinv
