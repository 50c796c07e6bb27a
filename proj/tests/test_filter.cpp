#include <doctest.h>

#include "flyinv/errors.hpp"
#include "flyinv/filter.hpp"
#include "flyinv/signal.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

using namespace flyinv;

namespace {

constexpr double kPi = std::numbers::pi;

FilterParams with_kind(FilterKind kind) {
    FilterParams fp;
    fp.kind = kind;
    return fp;
}

// Test-local classical RK4 on filter_derivative alone.
FilterState rk4(const FilterState& s, double t, double h, const FilterParams& fp,
                const std::function<double(double)>& i_inj) {
    auto f = [&](const FilterState& x, double tt) { return filter_derivative(x, i_inj(tt), 0.0, fp); };
    auto add = [](FilterState a, double c, const FilterState& d) {
        for (std::size_t i = 0; i < 4; ++i) {
            a.x[i] += c * d.x[i];
        }
        return a;
    };
    const auto k1 = f(s, t);
    const auto k2 = f(add(s, h / 2, k1), t + h / 2);
    const auto k3 = f(add(s, h / 2, k2), t + h / 2);
    const auto k4 = f(add(s, h, k3), t + h);
    FilterState out = s;
    for (std::size_t i = 0; i < 4; ++i) {
        out.x[i] += h / 6 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
    }
    return out;
}

// Steady-state |i_grid| / |i_inj| for a unit sinusoidal injection at f.
double simulated_gain(const FilterParams& fp, double f, double settle) {
    const double h = 1.0 / (f * 400.0);
    auto inj = [f](double t) { return std::sin(2 * kPi * f * t); };
    FilterState s{fp.kind, {}};
    const auto settle_steps = static_cast<std::int64_t>(std::llround(settle / h));
    for (std::int64_t k = 0; k < settle_steps; ++k) {
        s = rk4(s, static_cast<double>(k) * h, h, fp, inj);
    }
    const int periods = 20;
    std::vector<double> ig(static_cast<std::size_t>(400 * periods));
    const double t0 = static_cast<double>(settle_steps) * h;
    for (std::size_t k = 0; k < ig.size(); ++k) {
        ig[k] = s.grid_current();
        s = rk4(s, t0 + static_cast<double>(k) * h, h, fp, inj);
    }
    const TimeSeries ts(std::move(ig), h, t0);
    return harmonic_amplitudes(ts, f, 1).amplitudes[1];
}

// Frequency of the largest full_spectrum bin of the grid current after an
// initial 1 V charge on state x[charged], with no injection.
double ring_down_peak(const FilterParams& fp, double fs, double duration, std::size_t charged = 0) {
    const double h = 1.0 / fs;
    FilterState s{fp.kind, {}};
    s.x[charged] = 1.0;
    std::vector<double> ig(static_cast<std::size_t>(std::llround(duration * fs)));
    for (std::size_t k = 0; k < ig.size(); ++k) {
        ig[k] = s.grid_current();
        s = rk4(s, static_cast<double>(k) * h, h, fp, [](double) { return 0.0; });
    }
    const FrequencyTable t = full_spectrum(TimeSeries(std::move(ig), h));
    std::size_t best = 1;
    for (std::size_t k = 1; k < t.magnitudes.size(); ++k) {
        if (t.magnitudes[k] > t.magnitudes[best]) {
            best = k;
        }
    }
    return t.frequency(best);
}

}  // namespace

TEST_CASE("filter_derivative examples") {
    const FilterParams cl = with_kind(FilterKind::CL);
    const FilterState zero{FilterKind::CL, {}};
    const FilterState d0 = filter_derivative(zero, 0.0, 0.0, cl);
    for (double v : d0.x) {
        CHECK(v == 0.0);
    }

    FilterParams lossless = cl;
    lossless.cl.r_series = 0.0;
    const FilterState charged{FilterKind::CL, {1.0, 0.0, 0.0, 0.0}};
    CHECK(filter_derivative(charged, 0.0, 0.0, lossless).x[1] == doctest::Approx(200.0));

    FilterParams lcl = with_kind(FilterKind::LCL);
    lcl.lcl.c_s = 10e-9;
    const FilterState lzero{FilterKind::LCL, {}};
    CHECK(filter_derivative(lzero, 1.0, 0.0, lcl).x[0] == doctest::Approx(1e8));

    CHECK_THROWS_AS(filter_derivative(zero, 0.0, 0.0, lcl), PreconditionError);
}

TEST_CASE("filter_derivative is linear") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        const FilterParams fp = with_kind(kind);
        for (int trial = 0; trial < 50; ++trial) {
            FilterState a{kind, {}};
            FilterState b{kind, {}};
            for (int i = 0; i < FilterState::size(kind); ++i) {
                a.x[static_cast<std::size_t>(i)] = u(rng);
                b.x[static_cast<std::size_t>(i)] = u(rng);
            }
            const double ia = u(rng), ib = u(rng), va = 30 * u(rng), vb = 30 * u(rng);
            const double alpha = u(rng), beta = u(rng);
            FilterState combo{kind, {}};
            for (std::size_t i = 0; i < 4; ++i) {
                combo.x[i] = alpha * a.x[i] + beta * b.x[i];
            }
            const auto da = filter_derivative(a, ia, va, fp);
            const auto db = filter_derivative(b, ib, vb, fp);
            const auto dc = filter_derivative(combo, alpha * ia + beta * ib, alpha * va + beta * vb, fp);
            for (std::size_t i = 0; i < 4; ++i) {
                const double expect = alpha * da.x[i] + beta * db.x[i];
                CHECK(std::abs(dc.x[i] - expect) <= 1e-12 * (std::abs(expect) + 1e3 * std::abs(dc.x[i]) + 1.0));
            }
        }
    }
}

TEST_CASE("passivity: stored energy never rises without sources") {
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        const FilterParams fp = with_kind(kind);
        FilterState s{kind, {5.0, 0.3, -2.0, 0.1}};
        if (kind == FilterKind::CL) {
            s.x[2] = s.x[3] = 0.0;
        }
        double energy = s.stored_energy(fp);
        const double e0 = energy;
        const double h = 2e-7;
        for (int k = 0; k < 200000; ++k) {
            s = rk4(s, k * h, h, fp, [](double) { return 0.0; });
            const double next = s.stored_energy(fp);
            CHECK_MESSAGE(next <= energy * (1.0 + 1e-12), "step ", k);
            energy = next;
        }
        CHECK(energy < e0);
    }
}

TEST_CASE("transfer_magnitude") {
    const FilterParams cl = with_kind(FilterKind::CL);
    CHECK(transfer_magnitude(cl, 1e-3) == doctest::Approx(1.0).epsilon(1e-9));
    // omega^2 l c = 24.674 at 25 kHz
    CHECK(transfer_magnitude(cl, 25e3) == doctest::Approx(1.0 / 23.674).epsilon(1e-4));
    CHECK(transfer_magnitude(cl, 25e3) == doctest::Approx(0.04224).epsilon(1e-3));
    CHECK(std::isinf(transfer_magnitude(cl, resonance_frequency(cl))));
    CHECK_THROWS_AS(transfer_magnitude(cl, 0.0), PreconditionError);

    FilterParams pure = with_kind(FilterKind::LCL);
    pure.lcl.c_s = 0.0;  // current-divider limit
    const double w2 = std::pow(2 * kPi * 25e3, 2);
    CHECK(transfer_magnitude(pure, 25e3) ==
          doctest::Approx(1.0 / std::abs(1.0 - w2 * pure.lcl.l_g * pure.lcl.c_f)));
    const FilterParams lcl = with_kind(FilterKind::LCL);
    CHECK(transfer_magnitude(lcl, 1e-3) == doctest::Approx(1.0).epsilon(1e-9));
    // The LCL attenuates the switching frequency more than the CL.
    CHECK(transfer_magnitude(lcl, 25e3) < transfer_magnitude(cl, 25e3));
}

TEST_CASE("resonance_frequency") {
    CHECK(std::abs(resonance_frequency(with_kind(FilterKind::CL)) - 5032.9) < 0.1);
    CHECK(std::abs(resonance_frequency(with_kind(FilterKind::LCL)) - 8797.6) < 0.1);
    FilterParams sym = with_kind(FilterKind::LCL);
    sym.lcl.l_i = sym.lcl.l_g = 5e-3;
    sym.lcl.c_f = 200e-9;
    CHECK(resonance_frequency(sym) == doctest::Approx(std::sqrt(2.0 / (5e-3 * 200e-9)) / (2 * kPi)));
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        const double f = resonance_frequency(with_kind(kind));
        CHECK(f > 50.0);
        CHECK(f < 25e3);
    }
}

TEST_CASE("simulated sinusoidal gain matches transfer_magnitude") {
    // r_series = 1 ohm damps the start-up transient within the settle time; at
    // 1 kHz and 25 kHz it moves the gain by well under 0.1%.
    for (auto kind : {FilterKind::CL, FilterKind::LCL}) {
        FilterParams fp = with_kind(kind);
        fp.cl.r_series = fp.lcl.r_series = 1.0;
        for (double f : {1e3, 25e3}) {
            const double sim = simulated_gain(fp, f, 0.4);
            const double expect = transfer_magnitude(fp, f);
            CHECK_MESSAGE(std::abs(sim - expect) <= 0.01 * expect, to_string(kind), " at ", f, " Hz");
        }
    }
}

TEST_CASE("ring-down frequencies") {
    FilterParams cl = with_kind(FilterKind::CL);
    cl.cl.r_series = 0.5;
    CHECK(ring_down_peak(cl, 1e6, 0.05) == doctest::Approx(resonance_frequency(cl)).epsilon(0.02));

    // Converter node held stiff: the l_i / c_f / l_g loop rings at the
    // closed-form LCL resonance.
    FilterParams stiff = with_kind(FilterKind::LCL);
    stiff.lcl.c_s = 1.0;
    stiff.lcl.r_series = 0.5;
    CHECK(ring_down_peak(stiff, 1e6, 0.05, 2) == doctest::Approx(resonance_frequency(stiff)).epsilon(0.02));

    // Current-fed ladder as simulated: the ring-down peak is a pole of
    // transfer_magnitude (the gain there is far above its neighbours).
    FilterParams ladder = with_kind(FilterKind::LCL);
    ladder.lcl.r_series = 0.5;
    const double peak = ring_down_peak(ladder, 1e6, 0.05);
    double pole = peak;
    double best = 0.0;
    for (double f = 0.95 * peak; f <= 1.05 * peak; f += 0.5) {
        const double g = transfer_magnitude(ladder, f);
        if (g > best) {
            best = g;
            pole = f;
        }
    }
    CHECK(best > 1e3);
    CHECK(peak == doctest::Approx(pole).epsilon(0.02));
}

TEST_CASE("FilterParams validation") {
    FilterParams fp;
    fp.lcl.c_f = -1e-7;
    CHECK_THROWS_WITH_AS(fp.validate(), doctest::Contains("c_f"), ConfigError);
    fp = {};
    fp.lcl.c_s = 0.6 * fp.lcl.c_f;
    CHECK_THROWS_WITH_AS(fp.validate(), doctest::Contains("c_s"), ConfigError);
    fp = {};
    fp.cl.r_series = -1.0;
    CHECK_THROWS_AS(fp.validate(), ConfigError);
    CHECK(parse_filter_kind("LCL") == FilterKind::LCL);
    CHECK_THROWS_AS(parse_filter_kind("rc"), ConfigError);
}
