// flyinv: transient simulation and harmonic analysis of a two-switch flyback
// microinverter with CL / LCL output filters.

#include "flyinv/errors.hpp"
#include "flyinv/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <thread>

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2, kComplianceFailure = 3 };

flyinv::Scenario scenario_from(const std::string& config_path) {
    return config_path.empty() ? flyinv::parse_config("") : flyinv::load_config(config_path);
}

int cmd_simulate(const std::string& config_path, const std::string& filter, std::optional<double> r1,
                 double power, const std::string& dump_dir) {
    using namespace flyinv;
    Scenario scn = scenario_from(config_path);
    SimConfig cfg = scn.sim;
    cfg.filter.kind = parse_filter_kind(filter);
    if (r1) {
        cfg.flyback.r1 = *r1;
    }
    cfg.validate();

    cfg.modulator.m = calibrate_modulation_index(cfg, power);
    const SimResult res = run(cfg);
    const Spectrum spec = harmonic_amplitudes(res.grid_current, res.f0, scn.h_max);
    const EnergyAudit audit = energy_audit(res);
    const double thd_pct = 100.0 * thd(spec, scn.h_max);

    std::printf("filter            %s\n", std::string(to_string(cfg.filter.kind)).c_str());
    std::printf("r1                %.6g ohm\n", cfg.flyback.r1);
    std::printf("modulation index  %.6g\n", cfg.modulator.m);
    std::printf("p_in              %.6g W\n", res.p_in);
    std::printf("p_out             %.6g W\n", res.p_out);
    std::printf("p_loss_modeled    %.6g W\n", res.p_loss_modeled);
    std::printf("audit residual    %.3g W\n", audit.residual);
    std::printf("efficiency        %.6g\n", efficiency(res));
    std::printf("THD (h<=%d)       %.4g %%  %s\n", scn.h_max, thd_pct,
                compliance_check(thd_pct) ? "compliant" : "NOT compliant");
    std::printf("I1 rms            %.6g A\n", spec.amplitudes[1] / std::numbers::sqrt2);
    std::printf("mode fractions    charge %.3f  discharge %.3f  idle %.3f\n", res.mode_fractions.charge,
                res.mode_fractions.discharge, res.mode_fractions.idle);

    if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        const std::filesystem::path dir(dump_dir);
        write_waveform_csv(res.grid_current, dir / "grid_current.csv");
        write_waveform_csv(res.grid_voltage, dir / "grid_voltage.csv");
        write_waveform_csv(res.dc_current, dir / "dc_current.csv");
        write_waveform_csv(res.i_m_trace, dir / "i_m.csv");
        std::printf("waveforms written to %s\n", dump_dir.c_str());
    }
    return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& csv_path, const std::string& plot_dir,
              unsigned jobs, bool strict) {
    using namespace flyinv;
    Scenario scn = scenario_from(config_path);
    scn.strict = scn.strict || strict;
    const auto rows = run_sweep(scn, jobs);

    if (csv_path.empty() || csv_path == "-") {
        write_csv(rows, std::cout);
    } else {
        write_csv(rows, std::filesystem::path(csv_path));
    }
    bool failed = false;
    bool non_compliant = false;
    for (const auto& r : rows) {
        if (r.failed()) {
            failed = true;
            std::cerr << "point " << to_string(r.filter_kind) << " r1=" << r.r1_ohm << " P=" << r.p_target_w
                      << " failed: " << r.error << '\n';
        } else if (!r.compliant) {
            non_compliant = true;
        }
    }
    if (!plot_dir.empty()) {
        for (const auto& p : render_plots(rows, plot_dir)) {
            std::cerr << "wrote " << p.string() << '\n';
        }
    }
    if (failed) {
        return kNumericalError;
    }
    if (scn.strict && non_compliant) {
        std::cerr << "compliance failure: THD >= 5% on at least one point\n";
        return kComplianceFailure;
    }
    return kOk;
}

int cmd_bode(const std::string& config_path, const std::string& filter, double fmin, double fmax, int points) {
    using namespace flyinv;
    if (!(fmin > 0.0) || !(fmax > fmin) || points < 2) {
        throw ConfigError("bode: need 0 < fmin < fmax and points >= 2");
    }
    FilterParams fp = scenario_from(config_path).sim.filter;
    fp.kind = parse_filter_kind(filter);
    std::printf("frequency_hz,gain\n");
    const double ratio = std::log(fmax / fmin) / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double f = fmin * std::exp(ratio * i);
        std::printf("%.6g,%.6g\n", f, transfer_magnitude(fp, f));
    }
    return kOk;
}

int cmd_thd(const std::string& input, double f0, int h_max) {
    using namespace flyinv;
    const TimeSeries ts = read_waveform_csv(input);
    const Spectrum spec = harmonic_amplitudes(ts, f0, h_max);
    const double thd_pct = 100.0 * thd(spec, h_max);
    std::printf("THD %.6g %%  (fundamental %.6g, h_max %d)\n", thd_pct, spec.amplitudes[1], h_max);
    for (int h = 0; h <= std::min(h_max, 15); ++h) {
        std::printf("  h=%-3d %.6g\n", h, spec.amplitudes[static_cast<std::size_t>(h)]);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flyback microinverter simulator and harmonic analysis"};
    app.require_subcommand(1);

    std::string config_path;
    std::string filter = "cl";
    std::optional<double> r1;
    double power = 100.0;
    std::string dump_dir;
    auto* simulate = app.add_subcommand("simulate", "Calibrate to a target power and run one simulation");
    simulate->add_option("--config", config_path, "Scenario file");
    simulate->add_option("--filter", filter, "cl or lcl");
    simulate->add_option("--r1", r1, "Primary winding resistance, ohm");
    simulate->add_option("--power", power, "Target output power, W")->check(CLI::PositiveNumber);
    simulate->add_option("--dump-waveforms", dump_dir, "Directory for waveform CSVs");

    std::string csv_path;
    std::string plot_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool strict = false;
    auto* sweep = app.add_subcommand("sweep", "Run the filter x r1 x power sweep");
    sweep->add_option("--config", config_path, "Scenario file");
    sweep->add_option("--csv", csv_path, "Report CSV path (stdout when omitted)");
    sweep->add_option("--plots", plot_dir, "Directory for SVG plots");
    sweep->add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);
    sweep->add_flag("--strict", strict, "Exit 3 when any point breaks the 5% THD limit");

    double fmin = 10.0;
    double fmax = 100e3;
    int points = 200;
    auto* bode = app.add_subcommand("bode", "Lossless filter gain |i_grid / i_inj| as CSV");
    bode->add_option("--config", config_path, "Scenario file");
    bode->add_option("--filter", filter, "cl or lcl");
    bode->add_option("--fmin", fmin, "Lowest frequency, Hz");
    bode->add_option("--fmax", fmax, "Highest frequency, Hz");
    bode->add_option("--points", points, "Number of log-spaced points");

    std::string input;
    double f0 = 50.0;
    int h_max = flyinv::kDefaultHarmonicCeiling;
    auto* thd_cmd = app.add_subcommand("thd", "THD of a waveform CSV");
    thd_cmd->add_option("--input", input, "Waveform CSV (t_s,value)")->required();
    thd_cmd->add_option("--f0", f0, "Fundamental frequency, Hz");
    thd_cmd->add_option("--hmax", h_max, "Highest harmonic included");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(config_path, filter, r1, power, dump_dir);
        }
        if (sweep->parsed()) {
            return cmd_sweep(config_path, csv_path, plot_dir, jobs, strict);
        }
        if (bode->parsed()) {
            return cmd_bode(config_path, filter, fmin, fmax, points);
        }
        return cmd_thd(input, f0, h_max);
    } catch (const flyinv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const flyinv::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kConfigError;
    } catch (const flyinv::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
}
