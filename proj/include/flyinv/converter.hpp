#pragma once

#include <string_view>

namespace flyinv {

// Two-switch flyback power stage with an unfolding output. Both primary
// switches share one gate; the clamp diodes are folded into the charge-path
// resistance. Quantities are referred to the primary unless noted.

struct FlybackParams {
    double v_dc = 50.0;   ///< source voltage, V
    double l_m = 25e-6;   ///< magnetizing inductance, H
    double n = 0.125;     ///< turns ratio Np/Ns; n*V_g must stay below v_dc
    double r1 = 0.06;     ///< primary winding resistance, ohm
    double r2 = 0.05;     ///< secondary winding resistance, ohm
    double r_on = 0.06;   ///< on-resistance of each primary switch, ohm
    double v_d = 0.7;     ///< secondary diode forward drop, V

    /// Throws ConfigError naming the first field that breaks an invariant.
    void validate() const;
    bool operator==(const FlybackParams&) const = default;
};

struct ModulatorConfig {
    double f_sw = 25e3;   ///< switching frequency, Hz
    double f0 = 50.0;     ///< grid fundamental, Hz
    double m = 0.0;       ///< modulation index
    double d_max = 0.95;  ///< duty ceiling

    void validate() const;
    bool operator==(const ModulatorConfig&) const = default;
};

enum class ConductionMode { Charge, Discharge, Idle };

std::string_view to_string(ConductionMode mode) noexcept;

struct ConverterState {
    double i_m = 0.0;
    ConductionMode mode = ConductionMode::Idle;
};

/// min(m*|sin(2*pi*f0*t)|, d_max).
double duty_reference(double t, const ModulatorConfig& cfg) noexcept;

/// Trailing-edge PWM: on while the carrier phase frac(t*f_sw) is below the
/// duty reference.
bool gate_state(double t, const ModulatorConfig& cfg) noexcept;

/// Unfolder sign, +1 on the positive half-cycle including the zero crossing.
int polarity(double t, double f0) noexcept;

/// di_m/dt for the given mode. v_node is the converter-side filter voltage and
/// p the unfolder sign, so p*v_node is what the secondary sees.
double magnetizing_derivative(const ConverterState& state, double v_node, int p,
                              const FlybackParams& params) noexcept;

/// Secondary current delivered to the filter after unfolding.
double injected_current(const ConverterState& state, double t, const FlybackParams& params,
                        double f0) noexcept;

/// Mode selected by the gate at a step boundary. The DISCHARGE -> IDLE exit
/// on i_m reaching zero is an in-step event handled by the integrator.
ConductionMode mode_transition(const ConverterState& state, bool gate) noexcept;

}  // namespace flyinv
