#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "xbarlstm/device.hpp"
#include "xbarlstm/rng.hpp"

using namespace xbarlstm;

namespace {
DeviceParams defaults() { return DeviceParams{}; } // 100-300 uS, 4 uS steps, gamma 2
} // namespace

TEST_CASE("sample_device with zero d2d spread is exact") {
    DeviceParams p = defaults();
    p.sigma_d2d = 0.0;
    Rng rng(1);
    const DeviceState s = sample_device(p, 200e-6, rng);
    REQUIRE(s.g == 200e-6);
    REQUIRE(s.k_dev == 1.0);
}

TEST_CASE("sample_device accepts the window boundary and rejects outside") {
    DeviceParams p = defaults();
    Rng rng(1);
    REQUIRE(sample_device(p, 100e-6, rng).g == 100e-6);
    REQUIRE(sample_device(p, 300e-6, rng).g == 300e-6);
    REQUIRE_THROWS_AS(sample_device(p, 99e-6, rng), std::domain_error);
    REQUIRE_THROWS_AS(sample_device(p, 301e-6, rng), std::domain_error);
}

TEST_CASE("k_dev sampling matches its Normal(1, sigma) law") {
    DeviceParams p = defaults();
    p.sigma_d2d = 0.2;
    Rng rng(777);
    const int n = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const DeviceState s = sample_device(p, 200e-6, rng);
        REQUIRE(s.k_dev > 0.0);
        sum += s.k_dev;
        sum2 += s.k_dev * s.k_dev;
    }
    const double mean = sum / n;
    const double std = std::sqrt(sum2 / n - mean * mean);
    REQUIRE(mean == Catch::Approx(1.0).margin(0.01));
    REQUIRE(std == Catch::Approx(0.2).margin(0.01));
}

TEST_CASE("expected_update follows the saturating window") {
    const DeviceParams p = defaults();
    const PulseSpec set{p.v_set, 100e-9};
    const PulseSpec reset{p.v_reset, 100e-9};

    REQUIRE(expected_update(p, 100e-6, set) == Catch::Approx(4e-6).epsilon(1e-12));
    REQUIRE(expected_update(p, 300e-6, set) == 0.0);
    REQUIRE(expected_update(p, 200e-6, set) == Catch::Approx(1e-6).epsilon(1e-12));
    REQUIRE(expected_update(p, 200e-6, reset) == Catch::Approx(-1e-6).epsilon(1e-12));
    REQUIRE(expected_update(p, 100e-6, reset) == 0.0);
}

TEST_CASE("pulses at uncalibrated amplitudes are rejected") {
    const DeviceParams p = defaults();
    REQUIRE_THROWS_AS(expected_update(p, 200e-6, PulseSpec{0.5, 100e-9}), std::domain_error);
    REQUIRE_THROWS_AS(expected_update(p, 200e-6, PulseSpec{0.0, 100e-9}), std::domain_error);
    REQUIRE_THROWS_AS(expected_update(p, 200e-6, PulseSpec{0.8, 0.0}), std::domain_error);
}

TEST_CASE("apply_pulse with all flags off reduces to the expected update") {
    const DeviceParams p = defaults();
    Rng rng(5);
    const PulseSpec set{p.v_set, 100e-9};

    auto [s1, d1] = apply_pulse(DeviceState{100e-6, 1.0}, p, set, kNoiseOff, rng);
    REQUIRE(s1.g == Catch::Approx(104e-6).epsilon(1e-12));
    REQUIRE(d1 == Catch::Approx(4e-6).epsilon(1e-12));

    // Exact flag neutrality: delta equals expected_update followed by clamp.
    Rng rng2(6);
    for (int i = 0; i < 200; ++i) {
        const double g0 = rng2.uniform(p.g_min, p.g_max);
        const PulseSpec pulse = (i % 2) ? set : PulseSpec{p.v_reset, 100e-9};
        auto [s, d] = apply_pulse(DeviceState{g0, 2.5}, p, pulse, kNoiseOff, rng2);
        const double expected = std::clamp(g0 + expected_update(p, g0, pulse), p.g_min, p.g_max);
        REQUIRE(s.g == expected);
        REQUIRE(d == expected - g0);
    }
}

TEST_CASE("d2d scales the step by the frozen factor") {
    const DeviceParams p = defaults();
    Rng rng(5);
    NoiseFlags flags;
    flags.d2d = true;
    auto [s, d] = apply_pulse(DeviceState{200e-6, 1.5}, p, PulseSpec{p.v_set, 100e-9}, flags, rng);
    REQUIRE(d == Catch::Approx(1.5e-6).epsilon(1e-12));
    REQUIRE(s.k_dev == 1.5);
}

TEST_CASE("updates clamp at the window edge") {
    const DeviceParams p = defaults();
    Rng rng(5);
    auto [s, d] = apply_pulse(DeviceState{299.9999e-6, 1.0}, p, PulseSpec{p.v_set, 100e-9},
                              kNoiseOff, rng);
    REQUIRE(s.g <= p.g_max);
    REQUIRE(d >= 0.0);
}

TEST_CASE("noise-free polarity is monotone") {
    const DeviceParams p = defaults();
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double g0 = rng.uniform(p.g_min, p.g_max);
        auto [ss, ds] = apply_pulse(DeviceState{g0, 1.0}, p, PulseSpec{p.v_set, 100e-9},
                                    kNoiseOff, rng);
        auto [sr, dr] = apply_pulse(DeviceState{g0, 1.0}, p, PulseSpec{p.v_reset, 100e-9},
                                    kNoiseOff, rng);
        REQUIRE(ds >= 0.0);
        REQUIRE(dr <= 0.0);
    }
}

TEST_CASE("conductance never escapes the window under any flag mix") {
    const DeviceParams p = defaults();
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        NoiseFlags flags{trial % 2 == 0, trial % 3 == 0, trial % 5 == 0};
        DeviceState s = sample_device(p, rng.uniform(p.g_min, p.g_max), rng);
        for (int k = 0; k < 500; ++k) {
            const PulseSpec pulse{rng.uniform01() < 0.5 ? p.v_set : p.v_reset, 100e-9};
            s = apply_pulse(s, p, pulse, flags, rng).first;
            REQUIRE(s.g >= p.g_min);
            REQUIRE(s.g <= p.g_max);
        }
    }
}

TEST_CASE("identical seeds give bit-identical pulse sequences") {
    const DeviceParams p = defaults();
    Rng a(31), b(31);
    DeviceState sa = sample_device(p, 150e-6, a);
    DeviceState sb = sample_device(p, 150e-6, b);
    for (int k = 0; k < 100; ++k) {
        const PulseSpec pulse{(k % 3 == 0) ? p.v_reset : p.v_set, 100e-9};
        auto ra = apply_pulse(sa, p, pulse, kNoiseOn, a);
        auto rb = apply_pulse(sb, p, pulse, kNoiseOn, b);
        REQUIRE(ra.first.g == rb.first.g);
        REQUIRE(ra.second == rb.second);
        sa = ra.first;
        sb = rb.first;
    }
}

TEST_CASE("read_conductance is exact without noise and unbiased with it") {
    const DeviceParams p = defaults();
    Rng rng(17);
    const DeviceState s{250e-6, 1.0};
    REQUIRE(read_conductance(s, p, kNoiseOff, rng) == 250e-6);

    NoiseFlags read_only;
    read_only.read_noise = true;

    DeviceParams zero_sigma = p;
    zero_sigma.sigma_read = 0.0;
    REQUIRE(read_conductance(s, zero_sigma, read_only, rng) == 250e-6);

    // std of 10k reads of 200 uS at 1% read noise is 2 uS within 5%.
    const DeviceState s200{200e-6, 1.0};
    const int n = 10000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = read_conductance(s200, p, read_only, rng);
        REQUIRE(g > 0.0);
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / n;
    const double std = std::sqrt(sum2 / n - mean * mean);
    REQUIRE(std == Catch::Approx(2e-6).epsilon(0.05));
}
