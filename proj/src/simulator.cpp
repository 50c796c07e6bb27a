#include "flyinv/simulator.hpp"

#include "flyinv/errors.hpp"

#include <cmath>
#include <string>

namespace flyinv {

namespace {

// Packed integrator vector: i_m, four filter slots, e_in, e_loss, e_out.
using Vec = std::array<double, 8>;
constexpr std::size_t kIm = 0;
constexpr std::size_t kFilter = 1;
constexpr std::size_t kEin = 5;
constexpr std::size_t kEloss = 6;
constexpr std::size_t kEout = 7;

struct ModeTimes {
    double charge = 0.0;
    double discharge = 0.0;
    double idle = 0.0;

    void add(ConductionMode mode, double h) noexcept {
        switch (mode) {
            case ConductionMode::Charge: charge += h; break;
            case ConductionMode::Discharge: discharge += h; break;
            case ConductionMode::Idle: idle += h; break;
        }
    }
};

Vec pack(const SimState& s) noexcept {
    return {s.converter.i_m, s.filter.x[0], s.filter.x[1], s.filter.x[2], s.filter.x[3],
            s.e_in, s.e_loss, s.e_out};
}

SimState unpack(const Vec& y, ConductionMode mode, FilterKind kind) noexcept {
    SimState s;
    s.converter = {y[kIm], mode};
    s.filter = {kind, {y[kFilter], y[kFilter + 1], y[kFilter + 2], y[kFilter + 3]}};
    s.e_in = y[kEin];
    s.e_loss = y[kEloss];
    s.e_out = y[kEout];
    return s;
}

Vec derivative(const Vec& y, ConductionMode mode, int p, double t, const SimConfig& cfg) {
    const auto& fb = cfg.flyback;
    const ConverterState conv{y[kIm], mode};
    const FilterState fs{cfg.filter.kind, {y[kFilter], y[kFilter + 1], y[kFilter + 2], y[kFilter + 3]}};

    const double i_inj = mode == ConductionMode::Discharge ? fb.n * y[kIm] * p : 0.0;
    const double v_grid = cfg.grid.voltage(t);
    const FilterState dfs = filter_derivative(fs, i_inj, v_grid, cfg.filter);

    double p_in = 0.0;
    double p_loss = fs.resistive_loss(cfg.filter);
    if (mode == ConductionMode::Charge) {
        p_in = fb.v_dc * y[kIm];
        p_loss += (fb.r1 + 2.0 * fb.r_on) * y[kIm] * y[kIm];
    } else if (mode == ConductionMode::Discharge) {
        const double i_sec = fb.n * y[kIm];
        p_loss += fb.r2 * i_sec * i_sec + fb.v_d * std::abs(i_sec);
    }

    Vec d{};
    d[kIm] = magnetizing_derivative(conv, fs.node_voltage(), p, fb);
    for (std::size_t i = 0; i < 4; ++i) {
        d[kFilter + i] = dfs.x[i];
    }
    d[kEin] = p_in;
    d[kEloss] = p_loss;
    d[kEout] = v_grid * fs.grid_current();
    return d;
}

Vec axpy(const Vec& y, double a, const Vec& k) noexcept {
    Vec r;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = y[i] + a * k[i];
    }
    return r;
}

Vec rk4(const Vec& y, ConductionMode mode, int p, double t, double h, const SimConfig& cfg) {
    const Vec k1 = derivative(y, mode, p, t, cfg);
    const Vec k2 = derivative(axpy(y, 0.5 * h, k1), mode, p, t + 0.5 * h, cfg);
    const Vec k3 = derivative(axpy(y, 0.5 * h, k2), mode, p, t + 0.5 * h, cfg);
    const Vec k4 = derivative(axpy(y, h, k3), mode, p, t + h, cfg);
    Vec r;
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return r;
}

// Integrates one fixed-mode interval. A DISCHARGE interval that drives i_m
// through zero is cut at the linearly interpolated crossing, i_m is clamped
// to zero, and the rest of the interval runs in IDLE.
Vec segment(const Vec& y, ConductionMode& mode, int p, double t, double h, const SimConfig& cfg,
            ModeTimes* times) {
    if (h <= 0.0) {
        return y;
    }
    Vec out = rk4(y, mode, p, t, h, cfg);
    if (mode == ConductionMode::Discharge && out[kIm] <= 0.0) {
        const double theta = y[kIm] / (y[kIm] - out[kIm]);
        Vec mid = rk4(y, mode, p, t, theta * h, cfg);
        mid[kIm] = 0.0;
        if (times != nullptr) {
            times->add(ConductionMode::Discharge, theta * h);
        }
        mode = ConductionMode::Idle;
        out = rk4(mid, mode, p, t + theta * h, (1.0 - theta) * h, cfg);
        if (times != nullptr) {
            times->add(ConductionMode::Idle, (1.0 - theta) * h);
        }
        return out;
    }
    if (times != nullptr) {
        times->add(mode, h);
    }
    return out;
}

// Comparator margin (carrier phase minus duty reference) at step boundary j
// of the current switching period; negative means the gate is on.
double gate_margin(std::int64_t j, std::int64_t steps_per_period, double t,
                   const ModulatorConfig& mod) noexcept {
    return static_cast<double>(j) / static_cast<double>(steps_per_period) - duty_reference(t, mod);
}

SimState advance(const SimState& state, std::int64_t k, const SimConfig& cfg, std::int64_t spp,
                 ModeTimes* times) {
    const double dt = cfg.dt;
    const double t = static_cast<double>(k) * dt;
    const std::int64_t j = k % spp;
    const double g0 = gate_margin(j, spp, t, cfg.modulator);
    const bool gate = g0 < 0.0;
    const int p = polarity(t + 0.5 * dt, cfg.grid.f0);

    ConductionMode mode = mode_transition(state.converter, gate);
    Vec y = pack(state);
    if (gate) {
        // The carrier is linear across the step and the reference nearly so,
        // so the trailing edge is found by interpolating the margin.
        const double g1 = gate_margin(j + 1, spp, t + dt, cfg.modulator);
        if (g1 >= 0.0) {
            const double tau = dt * (-g0) / (g1 - g0);
            y = segment(y, mode, p, t, tau, cfg, times);
            mode = mode_transition(ConverterState{y[kIm], mode}, false);
            y = segment(y, mode, p, t + tau, dt - tau, cfg, times);
        } else {
            y = segment(y, mode, p, t, dt, cfg, times);
        }
    } else {
        y = segment(y, mode, p, t, dt, cfg, times);
    }

    SimState next = unpack(y, mode, cfg.filter.kind);
    if (!next.finite()) {
        throw NumericalError("non-finite state", t + dt);
    }
    return next;
}

}  // namespace

void SimConfig::validate() const {
    flyback.validate();
    modulator.validate();
    filter.validate();
    grid.validate();
    if (modulator.f0 != grid.f0) {
        throw ConfigError("modulator f0 and grid f0 differ");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("dt must be > 0");
    }
    const double steps = 1.0 / (modulator.f_sw * dt);
    if (steps < 100.0 - 1e-9) {
        throw ConfigError("dt must give at least 100 steps per switching period");
    }
    if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw ConfigError("dt must divide the switching period exactly");
    }
    const double capture_periods = t_capture * grid.f0;
    if (capture_periods < 2.0 - 1e-9 ||
        std::abs(capture_periods - std::round(capture_periods)) > 1e-6) {
        throw ConfigError("t_capture must span an integer number (>= 2) of fundamental periods");
    }
    if (t_settle * grid.f0 < 2.0 - 1e-9) {
        throw ConfigError("t_settle must cover at least 2 fundamental periods");
    }
    const double capture_steps = t_capture / dt;
    if (std::abs(capture_steps - std::round(capture_steps)) > 1e-6) {
        throw ConfigError("dt must divide t_capture exactly");
    }
}

std::int64_t SimConfig::steps_per_switching_period() const {
    return std::llround(1.0 / (modulator.f_sw * dt));
}

std::int64_t SimConfig::settle_steps() const { return std::llround(t_settle / dt); }

std::int64_t SimConfig::capture_steps() const { return std::llround(t_capture / dt); }

SimState SimState::zero(FilterKind kind) noexcept {
    SimState s;
    s.filter.kind = kind;
    return s;
}

bool SimState::finite() const noexcept {
    if (!std::isfinite(converter.i_m) || !std::isfinite(e_in) || !std::isfinite(e_loss) ||
        !std::isfinite(e_out)) {
        return false;
    }
    for (double v : filter.x) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

SimState step(const SimState& state, std::int64_t k, const SimConfig& cfg) {
    if (!state.finite()) {
        throw NumericalError("non-finite state entering step", static_cast<double>(k) * cfg.dt);
    }
    return advance(state, k, cfg, cfg.steps_per_switching_period(), nullptr);
}

SimResult run(const SimConfig& cfg) {
    cfg.validate();
    const std::int64_t spp = cfg.steps_per_switching_period();
    const std::int64_t settle = cfg.settle_steps();
    const std::int64_t capture = cfg.capture_steps();
    const auto n = static_cast<std::size_t>(capture);

    std::vector<double> i_grid(n), v_grid(n), i_dc(n), i_mag(n);
    SimState state = SimState::zero(cfg.filter.kind);
    for (std::int64_t k = 0; k < settle; ++k) {
        state = advance(state, k, cfg, spp, nullptr);
    }

    auto stored = [&cfg](const SimState& s) {
        return 0.5 * cfg.flyback.l_m * s.converter.i_m * s.converter.i_m +
               s.filter.stored_energy(cfg.filter);
    };
    const SimState start = state;
    ModeTimes times;
    for (std::int64_t c = 0; c < capture; ++c) {
        const std::int64_t k = settle + c;
        const double t = static_cast<double>(k) * cfg.dt;
        const auto idx = static_cast<std::size_t>(c);
        const bool gate = gate_margin(k % spp, spp, t, cfg.modulator) < 0.0;
        i_grid[idx] = state.filter.grid_current();
        v_grid[idx] = cfg.grid.voltage(t);
        i_dc[idx] = gate ? state.converter.i_m : 0.0;
        i_mag[idx] = state.converter.i_m;
        state = advance(state, k, cfg, spp, &times);
    }

    const double t0 = static_cast<double>(settle) * cfg.dt;
    const double total = times.charge + times.discharge + times.idle;
    SimResult res{.grid_current = TimeSeries(std::move(i_grid), cfg.dt, t0),
                  .grid_voltage = TimeSeries(std::move(v_grid), cfg.dt, t0),
                  .dc_current = TimeSeries(std::move(i_dc), cfg.dt, t0),
                  .i_m_trace = TimeSeries(std::move(i_mag), cfg.dt, t0),
                  .p_in = (state.e_in - start.e_in) / cfg.t_capture,
                  .p_out = 0.0,
                  .p_loss_modeled = (state.e_loss - start.e_loss) / cfg.t_capture,
                  .p_stored = (stored(state) - stored(start)) / cfg.t_capture,
                  .mode_fractions = {times.charge / total, times.discharge / total, times.idle / total},
                  .f0 = cfg.grid.f0,
                  .mod_index = cfg.modulator.m};
    res.p_out = average_power(res.grid_voltage, res.grid_current);
    return res;
}

double calibrate_modulation_index(const SimConfig& cfg, double target_p) {
    if (!(target_p > 0.0)) {
        throw RangeError("calibration target must be positive");
    }
    SimConfig probe = cfg;
    auto p_out_at = [&probe](double m) {
        probe.modulator.m = m;
        return run(probe).p_out;
    };

    double lo = 0.0;
    double hi = cfg.modulator.d_max;
    double p_lo = 0.0;
    double p_hi = p_out_at(hi);
    if (target_p > p_hi) {
        throw RangeError("target " + std::to_string(target_p) + " W exceeds the " +
                         std::to_string(p_hi) + " W reachable at m = d_max");
    }
    if (std::abs(p_hi - target_p) <= 0.01 * target_p) {
        return hi;
    }
    double m = hi;
    for (int iter = 0; iter < 40; ++iter) {
        m = 0.5 * (lo + hi);
        const double p = p_out_at(m);
        if (p < p_lo - 1e-9 * target_p || p > p_hi + 1e-9 * target_p) {
            throw CalibrationError("output power is not monotone in m near m = " + std::to_string(m));
        }
        if (std::abs(p - target_p) <= 0.01 * target_p) {
            return m;
        }
        if (p < target_p) {
            lo = m;
            p_lo = p;
        } else {
            hi = m;
            p_hi = p;
        }
    }
    return m;
}

double efficiency(const SimResult& res) {
    if (!(res.p_in > 0.0)) {
        throw DomainError("efficiency: input power is not positive");
    }
    return res.p_out / res.p_in;
}

EnergyAudit energy_audit(const SimResult& res) {
    return {res.p_in, res.p_out, res.p_loss_modeled, res.p_in - res.p_out - res.p_loss_modeled};
}

double grid_current_thd(const SimResult& res, int h_max) {
    return thd(harmonic_amplitudes(res.grid_current, res.f0, h_max), h_max);
}

}  // namespace flyinv
