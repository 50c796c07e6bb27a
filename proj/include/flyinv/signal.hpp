#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace flyinv {

/// Uniformly sampled real waveform. Sample k sits at t0 + k*dt.
class TimeSeries {
public:
    /// Throws PreconditionError unless dt > 0, samples is non-empty and every
    /// sample is finite.
    TimeSeries(std::vector<double> samples, double dt, double t0 = 0.0);

    std::span<const double> samples() const noexcept { return samples_; }
    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    /// Length of the window covered by the samples, N*dt.
    double span() const noexcept { return static_cast<double>(samples_.size()) * dt_; }
    double operator[](std::size_t k) const noexcept { return samples_[k]; }

    bool operator==(const TimeSeries&) const = default;

private:
    std::vector<double> samples_;
    double dt_;
    double t0_;
};

/// Harmonic table at multiples of f0. amplitudes[0] is the DC mean, the rest
/// are peak amplitudes of cos(2*pi*h*f0*t + phases[h]).
struct Spectrum {
    double f0 = 0.0;
    std::vector<double> amplitudes;
    std::vector<double> phases;

    int h_max() const noexcept { return static_cast<int>(amplitudes.size()) - 1; }
};

/// One-sided discrete Fourier table over the full frequency grid. Plot use
/// only; harmonic analysis goes through harmonic_amplitudes().
struct FrequencyTable {
    double df = 0.0;                 ///< bin spacing 1/(N*dt)
    std::vector<double> magnitudes;  ///< peak-amplitude convention
    std::vector<double> power;       ///< mean-square contribution per bin; sums to mean(x^2)

    double frequency(std::size_t k) const noexcept { return df * static_cast<double>(k); }
};

inline constexpr int kDefaultHarmonicCeiling = 40;

double rms(const TimeSeries& ts);

/// Single-bin discrete Fourier projection at h*f0 for h = 0..h_max over the
/// whole series, which must span an integer number of fundamental periods.
Spectrum harmonic_amplitudes(const TimeSeries& ts, double f0, int h_max);

/// sqrt(sum_{h=2..h_max} A_h^2) / A_1, as a ratio.
double thd(const Spectrum& spec, int h_max);

/// Mean of v*i over a shared, integer-period window.
double average_power(const TimeSeries& v, const TimeSeries& i);

FrequencyTable full_spectrum(const TimeSeries& ts);

/// True when span*f0 is within 1e-6 of an integer >= 1.
bool spans_integer_periods(const TimeSeries& ts, double f0) noexcept;

// Waveform CSV: header `t_s,value`, one `t,value` pair per line.
void write_waveform_csv(const TimeSeries& ts, const std::filesystem::path& path);
TimeSeries read_waveform_csv(const std::filesystem::path& path);

}  // namespace flyinv
