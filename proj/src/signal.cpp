#include "flyinv/signal.hpp"

#include "flyinv/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

namespace flyinv {

TimeSeries::TimeSeries(std::vector<double> samples, double dt, double t0)
    : samples_(std::move(samples)), dt_(dt), t0_(t0) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw PreconditionError("TimeSeries: dt must be positive and finite");
    }
    if (samples_.empty()) {
        throw PreconditionError("TimeSeries: no samples");
    }
    for (double x : samples_) {
        if (!std::isfinite(x)) {
            throw PreconditionError("TimeSeries: non-finite sample");
        }
    }
}

double rms(const TimeSeries& ts) {
    const auto s = ts.samples();
    if (s.empty()) {
        throw DomainError("rms of an empty series");
    }
    const double sum_sq = std::transform_reduce(s.begin(), s.end(), 0.0, std::plus<>{},
                                                [](double x) { return x * x; });
    return std::sqrt(sum_sq / static_cast<double>(s.size()));
}

bool spans_integer_periods(const TimeSeries& ts, double f0) noexcept {
    const double periods = ts.span() * f0;
    return periods >= 1.0 - 1e-6 && std::abs(periods - std::round(periods)) < 1e-6;
}

Spectrum harmonic_amplitudes(const TimeSeries& ts, double f0, int h_max) {
    if (!(f0 > 0.0)) {
        throw PreconditionError("harmonic_amplitudes: f0 must be positive");
    }
    if (h_max < 0) {
        throw PreconditionError("harmonic_amplitudes: negative harmonic ceiling");
    }
    if (!spans_integer_periods(ts, f0)) {
        throw PreconditionError("harmonic_amplitudes: window of " + std::to_string(ts.span()) +
                                " s is not an integer number of fundamental periods");
    }
    if (static_cast<double>(h_max) * f0 >= 0.5 / ts.dt()) {
        throw RangeError("harmonic_amplitudes: harmonic " + std::to_string(h_max) +
                         " lies at or above the Nyquist frequency");
    }

    const auto x = ts.samples();
    const std::size_t n = x.size();
    const double scale = 2.0 / static_cast<double>(n);

    Spectrum spec;
    spec.f0 = f0;
    spec.amplitudes.assign(static_cast<std::size_t>(h_max) + 1, 0.0);
    spec.phases.assign(static_cast<std::size_t>(h_max) + 1, 0.0);
    spec.amplitudes[0] = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    if (spec.amplitudes[0] < 0.0) {
        spec.amplitudes[0] = -spec.amplitudes[0];
        spec.phases[0] = std::numbers::pi;
    }
    if (h_max == 0) {
        return spec;
    }

    // When a fundamental period holds a whole number of samples, the periods
    // are summed sample-wise first; every kernel repeats with the fundamental,
    // so only one period needs correlating.
    std::span<const double> period = x;
    std::vector<double> folded;
    const double per_period = 1.0 / (f0 * ts.dt());
    const auto spp = static_cast<std::size_t>(std::llround(per_period));
    if (std::abs(per_period - static_cast<double>(spp)) < 1e-9 * per_period && spp > 0 &&
        n % spp == 0 && n > spp) {
        folded.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(spp));
        for (std::size_t start = spp; start < n; start += spp) {
            for (std::size_t k = 0; k < spp; ++k) {
                folded[k] += x[start + k];
            }
        }
        period = folded;
    }
    const std::size_t m = period.size();

    // base[k] = exp(-j*w0*t_k); the h-th projection kernel is base^h, built by
    // repeated multiplication so only one trig evaluation per sample is needed.
    const double w0 = 2.0 * std::numbers::pi * f0;
    std::vector<double> base_re(m), base_im(m);
    for (std::size_t k = 0; k < m; ++k) {
        base_re[k] = std::cos(w0 * ts.time(k));
        base_im[k] = -std::sin(w0 * ts.time(k));
    }
    std::vector<double> ker_re = base_re;
    std::vector<double> ker_im = base_im;
    for (int h = 1; h <= h_max; ++h) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            re += period[k] * ker_re[k];
            im += period[k] * ker_im[k];
        }
        const std::complex<double> acc{re * scale, im * scale};
        spec.amplitudes[static_cast<std::size_t>(h)] = std::abs(acc);
        spec.phases[static_cast<std::size_t>(h)] = std::arg(acc);
        if (h < h_max) {
            for (std::size_t k = 0; k < m; ++k) {
                const double r = ker_re[k] * base_re[k] - ker_im[k] * base_im[k];
                ker_im[k] = ker_re[k] * base_im[k] + ker_im[k] * base_re[k];
                ker_re[k] = r;
            }
        }
    }
    return spec;
}

double thd(const Spectrum& spec, int h_max) {
    if (h_max > spec.h_max()) {
        throw PreconditionError("thd: ceiling " + std::to_string(h_max) +
                                " exceeds spectrum length");
    }
    if (spec.amplitudes.size() < 2 || !(spec.amplitudes[1] > 0.0)) {
        throw DomainError("thd: no fundamental detected");
    }
    double sum_sq = 0.0;
    for (int h = 2; h <= h_max; ++h) {
        const double a = spec.amplitudes[static_cast<std::size_t>(h)];
        sum_sq += a * a;
    }
    return std::sqrt(sum_sq) / spec.amplitudes[1];
}

double average_power(const TimeSeries& v, const TimeSeries& i) {
    if (v.size() != i.size() || v.dt() != i.dt() || v.t0() != i.t0()) {
        throw PreconditionError("average_power: voltage and current sampling differ");
    }
    const auto vs = v.samples();
    const auto is = i.samples();
    const double sum = std::transform_reduce(vs.begin(), vs.end(), is.begin(), 0.0);
    return sum / static_cast<double>(vs.size());
}

FrequencyTable full_spectrum(const TimeSeries& ts) {
    const std::size_t n = ts.size();
    const std::size_t bins = n / 2 + 1;
    std::vector<double> in(ts.samples().begin(), ts.samples().end());
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    // FFTW_ESTIMATE does not touch the input array while planning.
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    FrequencyTable table;
    table.df = 1.0 / (static_cast<double>(n) * ts.dt());
    table.magnitudes.resize(bins);
    table.power.resize(bins);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < bins; ++k) {
        const double mag = std::hypot(out[k][0], out[k][1]) * inv_n;
        // Interior bins fold in their negative-frequency mirror.
        const bool self_mirrored = (k == 0) || (n % 2 == 0 && k == n / 2);
        table.magnitudes[k] = self_mirrored ? mag : 2.0 * mag;
        table.power[k] = self_mirrored ? mag * mag : 2.0 * mag * mag;
    }
    fftw_free(out);
    return table;
}

}  // namespace flyinv
