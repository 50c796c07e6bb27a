#pragma once

#include "flyinv/converter.hpp"
#include "flyinv/filter.hpp"
#include "flyinv/signal.hpp"

#include <array>
#include <cstdint>

namespace flyinv {

struct SimConfig {
    FlybackParams flyback;
    ModulatorConfig modulator;
    FilterParams filter;
    GridParams grid;
    double dt = 2e-7;        ///< 200 steps per 25 kHz switching period
    double t_settle = 0.1;   ///< discarded lead-in, s
    double t_capture = 0.1;  ///< analysed window, s

    /// Checks every component plus the timing rules: dt divides the switching
    /// period with at least 100 steps per period, t_capture is an integer
    /// number (>= 2) of fundamental periods, t_settle >= 2 periods.
    void validate() const;
    std::int64_t steps_per_switching_period() const;
    std::int64_t settle_steps() const;
    std::int64_t capture_steps() const;

    bool operator==(const SimConfig&) const = default;
};

/// Converter plus filter state advanced by the integrator. e_in and e_loss are
/// running energy integrals (J) carried through the same RK4 stages as the
/// circuit states.
struct SimState {
    ConverterState converter;
    FilterState filter;
    double e_in = 0.0;
    double e_loss = 0.0;
    double e_out = 0.0;

    static SimState zero(FilterKind kind) noexcept;
    bool finite() const noexcept;
};

struct ModeFractions {
    double charge = 0.0;
    double discharge = 0.0;
    double idle = 0.0;
};

struct SimResult {
    TimeSeries grid_current;
    TimeSeries grid_voltage;
    TimeSeries dc_current;
    TimeSeries i_m_trace;
    double p_in = 0.0;
    double p_out = 0.0;
    double p_loss_modeled = 0.0;
    /// Change of stored energy (magnetizing + filter) across the capture
    /// window divided by its length; ~0 in periodic steady state.
    double p_stored = 0.0;
    ModeFractions mode_fractions;
    double f0 = 50.0;
    double mod_index = 0.0;
};

struct EnergyAudit {
    double p_in = 0.0;
    double p_out = 0.0;
    double p_loss_modeled = 0.0;
    double residual = 0.0;
};

/// Advance by one integrator step starting at step index k (t = k*dt). The
/// gate and unfolder polarity are fixed per sub-interval; a trailing PWM edge
/// or a diode turn-off inside the step splits it. Throws NumericalError if the
/// result is not finite.
SimState step(const SimState& state, std::int64_t k, const SimConfig& cfg);

/// Time-domain run from zero state: t_settle discarded, then t_capture
/// recorded.
SimResult run(const SimConfig& cfg);

/// Bisection on the modulation index until p_out is within 1% of target_p.
double calibrate_modulation_index(const SimConfig& cfg, double target_p);

double efficiency(const SimResult& res);
EnergyAudit energy_audit(const SimResult& res);
double grid_current_thd(const SimResult& res, int h_max = kDefaultHarmonicCeiling);

}  // namespace flyinv
