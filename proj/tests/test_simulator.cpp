#include <doctest.h>

#include "flyinv/errors.hpp"
#include "flyinv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

using namespace flyinv;

namespace {

SimConfig base(FilterKind kind, double m) {
    SimConfig cfg;
    cfg.filter.kind = kind;
    cfg.modulator.m = m;
    return cfg;
}

SimConfig lossless(FilterKind kind, double m) {
    SimConfig cfg = base(kind, m);
    cfg.flyback.r1 = cfg.flyback.r2 = cfg.flyback.r_on = cfg.flyback.v_d = 0.0;
    cfg.filter.cl.r_series = cfg.filter.lcl.r_series = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("zero state is an equilibrium with no excitation") {
    SimConfig cfg = base(FilterKind::LCL, 0.0);
    cfg.grid.v_g_amp = 0.0;
    SimState s = SimState::zero(FilterKind::LCL);
    for (std::int64_t k = 0; k < 5000; ++k) {
        s = step(s, k, cfg);
    }
    CHECK(s.converter.i_m == 0.0);
    CHECK(s.converter.mode == ConductionMode::Idle);
    for (double x : s.filter.x) {
        CHECK(x == 0.0);
    }
    CHECK(s.e_in == 0.0);
}

TEST_CASE("step rejects a non-finite state") {
    const SimConfig cfg = base(FilterKind::CL, 0.3);
    SimState s = SimState::zero(FilterKind::CL);
    s.filter.x[0] = std::nan("");
    CHECK_THROWS_AS(step(s, 0, cfg), NumericalError);
}

TEST_CASE("converter disabled: CL current is the phasor steady state") {
    // The series R-L-C start-up ring decays with time constant 2l/r = 0.1 s,
    // so the settle window is stretched to six time constants.
    SimConfig cfg = base(FilterKind::CL, 0.0);
    cfg.t_settle = 0.6;
    const SimResult res = run(cfg);
    const double w = 2 * std::numbers::pi * cfg.grid.f0;
    const std::complex<double> z(cfg.filter.cl.r_series, w * cfg.filter.cl.l - 1.0 / (w * cfg.filter.cl.c));
    const double expect = cfg.grid.v_g_amp / std::abs(z);
    const Spectrum spec = harmonic_amplitudes(res.grid_current, cfg.grid.f0, 1);
    CHECK(spec.amplitudes[1] == doctest::Approx(expect).epsilon(0.01));
    // Every sample within 1% of the peak of the phasor waveform.
    const double phase = std::arg(-1.0 / z);
    double worst = 0.0;
    for (std::size_t k = 0; k < res.grid_current.size(); ++k) {
        const double t = res.grid_current.time(k);
        worst = std::max(worst, std::abs(res.grid_current[k] - expect * std::sin(w * t + phase)));
    }
    CHECK(worst < 0.01 * expect);
    CHECK(grid_current_thd(res) < 1e-3);
    cfg.t_settle = 0.1;
    CHECK(harmonic_amplitudes(run(cfg).grid_current, cfg.grid.f0, 1).amplitudes[1] ==
          doctest::Approx(expect).epsilon(0.01));
    CHECK(std::abs(res.p_in) < 0.1);
    CHECK(std::abs(res.p_out) < 0.1);
    const EnergyAudit audit = energy_audit(res);
    CHECK(std::abs(audit.p_loss_modeled) < 0.1);
    CHECK(std::abs(audit.residual) < 0.1);
}

TEST_CASE("lossless conversion conserves power") {
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        CAPTURE(to_string(kind));
        const SimResult res = run(lossless(kind, 0.3));
        REQUIRE(res.p_out > 10.0);
        CHECK(res.p_out == doctest::Approx(res.p_in).epsilon(0.002));
        CHECK(std::abs(efficiency(res) - 1.0) <= 0.002);
        const EnergyAudit audit = energy_audit(res);
        CHECK(std::abs(audit.p_loss_modeled) < 1e-12);
        CHECK(std::abs(audit.residual) <= 0.002 * audit.p_in);
    }
}

TEST_CASE("lossy run: audit closes and invariants hold") {
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        CAPTURE(to_string(kind));
        const SimResult res = run(base(kind, 0.33));
        CHECK(res.p_in >= res.p_out);
        CHECK(res.p_out > 0.0);
        CHECK(std::abs(energy_audit(res).residual) <= 1e-3 * res.p_in);
        const auto im = res.i_m_trace.samples();
        CHECK(*std::min_element(im.begin(), im.end()) >= 0.0);
        const auto fr = res.mode_fractions;
        CHECK(fr.charge + fr.discharge + fr.idle == doctest::Approx(1.0));
        CHECK(fr.idle > 0.0);
        CHECK(res.grid_current.dt() == res.dc_current.dt());
        CHECK(res.grid_current.size() == res.i_m_trace.size());
        CHECK(res.grid_current.t0() == res.grid_voltage.t0());
    }
}

TEST_CASE("repeated runs are bit-identical") {
    const SimConfig cfg = base(FilterKind::LCL, 0.3);
    const SimResult a = run(cfg);
    const SimResult b = run(cfg);
    CHECK(a.grid_current == b.grid_current);
    CHECK(a.dc_current == b.dc_current);
    CHECK(a.i_m_trace == b.i_m_trace);
    CHECK(a.p_in == b.p_in);
    CHECK(a.p_out == b.p_out);
}

TEST_CASE("efficiency decreases with each parasitic at fixed m") {
    const SimConfig cfg = base(FilterKind::CL, 0.3);
    const double eta0 = efficiency(run(cfg));
    SUBCASE("r1") {
        SimConfig a = cfg, b = cfg;
        a.flyback.r1 = 0.12;
        b.flyback.r1 = 0.24;
        const double e1 = efficiency(run(a));
        const double e2 = efficiency(run(b));
        CHECK(eta0 > e1);
        CHECK(e1 > e2);
    }
    SUBCASE("r_on") {
        SimConfig a = cfg;
        a.flyback.r_on *= 2;
        CHECK(efficiency(run(a)) < eta0);
    }
    SUBCASE("r2") {
        SimConfig a = cfg;
        a.flyback.r2 *= 2;
        CHECK(efficiency(run(a)) < eta0);
    }
    SUBCASE("v_d") {
        SimConfig a = cfg;
        a.flyback.v_d *= 2;
        CHECK(efficiency(run(a)) < eta0);
    }
}

TEST_CASE("calibration") {
    SimConfig cfg = base(FilterKind::CL, 0.0);
    SUBCASE("re-simulation hits the target") {
        const double m = calibrate_modulation_index(cfg, 100.0);
        cfg.modulator.m = m;
        const SimResult res = run(cfg);
        CHECK(std::abs(res.p_out - 100.0) <= 1.0);
        CHECK(res.mod_index == m);
        const double eta = efficiency(res);
        CHECK(eta >= 0.90);
        CHECK(eta <= 0.99);
        CHECK(std::abs(energy_audit(res).residual) <= 1e-3 * res.p_in);
        CHECK(grid_current_thd(res) < 0.05);
    }
    SUBCASE("small m gives small power") {
        cfg.modulator.m = 1e-3;
        CHECK(std::abs(run(cfg).p_out) < 0.1);
    }
    SUBCASE("unreachable target") {
        cfg.modulator.m = cfg.modulator.d_max;
        const double p_max = run(cfg).p_out;
        CHECK_THROWS_AS(calibrate_modulation_index(cfg, 2 * p_max), RangeError);
        CHECK_THROWS_AS(calibrate_modulation_index(cfg, 0.0), RangeError);
    }
}

TEST_CASE("efficiency arithmetic") {
    SimResult res{.grid_current = TimeSeries({0.0, 0.0}, 1e-3),
                  .grid_voltage = TimeSeries({0.0, 0.0}, 1e-3),
                  .dc_current = TimeSeries({0.0, 0.0}, 1e-3),
                  .i_m_trace = TimeSeries({0.0, 0.0}, 1e-3),
                  .p_in = 105.0,
                  .p_out = 99.75};
    CHECK(efficiency(res) == doctest::Approx(0.95));
    res.p_in = 0.0;
    CHECK_THROWS_AS(efficiency(res), DomainError);
}

TEST_CASE("SimConfig validation") {
    SimConfig cfg;
    cfg.dt = 1e-6;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.dt = 3e-7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.t_capture = 0.025;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.t_capture = 0.02;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.t_settle = 0.03;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.grid.f0 = 60.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.steps_per_switching_period() == 200);
}
