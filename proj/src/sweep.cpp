#include "flyinv/errors.hpp"
#include "flyinv/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace flyinv {

bool compliance_check(double thd_pct) noexcept { return thd_pct < 5.0; }

ReportRow evaluate_point(const SimConfig& base, FilterKind kind, double r1, double power, int h_max) {
    ReportRow row;
    row.filter_kind = kind;
    row.r1_ohm = r1;
    row.p_target_w = power;

    SimConfig cfg = base;
    cfg.filter.kind = kind;
    cfg.flyback.r1 = r1;
    try {
        cfg.modulator.m = calibrate_modulation_index(cfg, power);
        const SimResult res = run(cfg);
        const Spectrum spec = harmonic_amplitudes(res.grid_current, res.f0, h_max);
        const EnergyAudit audit = energy_audit(res);
        row.p_in_w = res.p_in;
        row.p_out_w = res.p_out;
        row.efficiency = efficiency(res);
        row.thd_pct = 100.0 * thd(spec, h_max);
        row.i1_rms_a = spec.amplitudes[1] / std::sqrt(2.0);
        row.mod_index = cfg.modulator.m;
        row.compliant = compliance_check(row.thd_pct);
        row.p_loss_w = audit.p_loss_modeled;
        row.audit_residual_w = audit.residual;
    } catch (const std::exception& e) {
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        row.p_in_w = row.p_out_w = row.efficiency = row.thd_pct = row.i1_rms_a = nan;
        row.p_loss_w = row.audit_residual_w = nan;
        row.mod_index = nan;
        row.compliant = false;
        row.error = e.what();
        if (row.error.empty()) {
            row.error = "unknown failure";
        }
    }
    return row;
}

std::vector<ReportRow> run_sweep(const Scenario& scn, unsigned jobs) {
    scn.validate();
    struct Point {
        FilterKind kind;
        double r1;
        double power;
    };
    std::vector<FilterKind> kinds = scn.filters;
    std::vector<double> r1s = scn.sweep_r1;
    std::vector<double> powers = scn.sweep_power;
    std::sort(kinds.begin(), kinds.end());
    kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
    std::sort(r1s.begin(), r1s.end());
    std::sort(powers.begin(), powers.end());

    std::vector<Point> points;
    for (auto kind : kinds) {
        for (double r1 : r1s) {
            for (double p : powers) {
                points.push_back({kind, r1, p});
            }
        }
    }

    std::vector<ReportRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            rows[i] = evaluate_point(scn.sim, points[i].kind, points[i].r1, points[i].power, scn.h_max);
        }
    };
    const unsigned n_workers = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    return rows;
}

}  // namespace flyinv
