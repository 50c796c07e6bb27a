#include "flyinv/converter.hpp"

#include "flyinv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace flyinv {

namespace {

void require(bool ok, const char* field, const char* rule) {
    if (!ok) {
        throw ConfigError(std::string(field) + " " + rule);
    }
}

}  // namespace

void FlybackParams::validate() const {
    require(v_dc > 0.0, "v_dc", "must be > 0");
    require(l_m > 0.0, "l_m", "must be > 0");
    require(n > 0.0, "n", "must be > 0");
    require(r1 >= 0.0, "r1", "must be >= 0");
    require(r2 >= 0.0, "r2", "must be >= 0");
    require(r_on >= 0.0, "r_on", "must be >= 0");
    require(v_d >= 0.0, "v_d", "must be >= 0");
}

void ModulatorConfig::validate() const {
    require(f0 > 0.0, "f0", "must be > 0");
    require(f_sw > 2.0 * f0, "f_sw", "must exceed twice f0");
    require(d_max >= 0.0 && d_max <= 0.95, "d_max", "must lie in [0, 0.95]");
    require(m >= 0.0 && m <= d_max, "m", "must lie in [0, d_max]");
}

std::string_view to_string(ConductionMode mode) noexcept {
    switch (mode) {
        case ConductionMode::Charge: return "CHARGE";
        case ConductionMode::Discharge: return "DISCHARGE";
        case ConductionMode::Idle: return "IDLE";
    }
    return "?";
}

double duty_reference(double t, const ModulatorConfig& cfg) noexcept {
    const double s = std::abs(std::sin(2.0 * std::numbers::pi * cfg.f0 * t));
    return std::min(cfg.m * s, cfg.d_max);
}

bool gate_state(double t, const ModulatorConfig& cfg) noexcept {
    const double phase = t * cfg.f_sw;
    return phase - std::floor(phase) < duty_reference(t, cfg);
}

int polarity(double t, double f0) noexcept {
    // Phase within the fundamental period; both zero crossings count as +1.
    const double phase = t * f0 - std::floor(t * f0);
    return phase <= 0.5 ? 1 : -1;
}

double magnetizing_derivative(const ConverterState& state, double v_node, int p,
                              const FlybackParams& params) noexcept {
    switch (state.mode) {
        case ConductionMode::Charge:
            return (params.v_dc - (params.r1 + 2.0 * params.r_on) * state.i_m) / params.l_m;
        case ConductionMode::Discharge:
            return -(params.n * (p * v_node + params.v_d) + params.n * params.n * params.r2 * state.i_m) /
                   params.l_m;
        case ConductionMode::Idle:
            return 0.0;
    }
    return 0.0;
}

double injected_current(const ConverterState& state, double t, const FlybackParams& params,
                        double f0) noexcept {
    if (state.mode != ConductionMode::Discharge) {
        return 0.0;
    }
    return params.n * state.i_m * polarity(t, f0);
}

ConductionMode mode_transition(const ConverterState& state, bool gate) noexcept {
    if (gate) {
        return ConductionMode::Charge;
    }
    return state.i_m > 0.0 ? ConductionMode::Discharge : ConductionMode::Idle;
}

}  // namespace flyinv
