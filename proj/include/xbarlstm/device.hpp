#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "xbarlstm/rng.hpp"

namespace xbarlstm {

// Phenomenological model of a single passive-crossbar RRAM cell.
//
// The expected (noise-free) conductance step under a fixed-amplitude pulse
// uses a saturating power-law window: the step shrinks as the cell
// approaches the window edge it is being driven towards, which gives the
// state-dependent nonlinearity and saturation of real filamentary devices.
// Every constant is a parameter so the model can be recalibrated.
struct DeviceParams {
    double g_min = 100e-6;    // S, lower conductance bound
    double g_max = 300e-6;    // S, upper conductance bound
    double a_set = 4e-6;      // S, largest set step (at g = g_min)
    double a_reset = 4e-6;    // S, largest reset step (at g = g_max)
    double gamma = 2.0;       // window nonlinearity exponent
    double sigma_d2d = 0.2;   // relative std of the frozen per-device step scale
    double sigma_c2c = 0.1;   // relative std of per-pulse step noise
    double sigma_read = 0.01; // relative std of read noise
    double v_set = 0.8;       // V, calibrated set (potentiation) amplitude
    double v_reset = -0.8;    // V, calibrated reset (depression) amplitude

    void validate() const {
        if (!(g_min > 0.0) || !(g_min < g_max))
            throw std::domain_error("DeviceParams: require 0 < g_min < g_max");
        if (!(a_set > 0.0) || !(a_reset > 0.0))
            throw std::domain_error("DeviceParams: require a_set > 0 and a_reset > 0");
        if (!(gamma >= 0.0))
            throw std::domain_error("DeviceParams: require gamma >= 0");
        if (sigma_d2d < 0.0 || sigma_c2c < 0.0 || sigma_read < 0.0)
            throw std::domain_error("DeviceParams: sigma fields must be >= 0");
        if (!(v_set > 0.0) || !(v_reset < 0.0))
            throw std::domain_error("DeviceParams: require v_set > 0 > v_reset");
    }
};

// One programming pulse. Sign of the amplitude selects the polarity:
// positive = set (potentiation), negative = reset (depression).
// A zero-amplitude pulse is represented by issuing no pulse at all.
struct PulseSpec {
    double amplitude; // V, signed
    double duration;  // s
};

enum class PulsePolarity { set, reset };

struct NoiseFlags {
    bool d2d = false;
    bool c2c = false;
    bool read_noise = false;
};

inline constexpr NoiseFlags kNoiseOff{false, false, false};
inline constexpr NoiseFlags kNoiseOn{true, true, true};

// One RRAM cell: conductance plus the per-device step factor frozen at
// array fabrication time.
struct DeviceState {
    double g;            // S
    double k_dev = 1.0;  // multiplicative step scale, > 0
};

// The device model is only calibrated at the configured set/reset
// amplitudes; anything else is rejected.
inline PulsePolarity pulse_polarity(const DeviceParams& params, const PulseSpec& pulse) {
    if (!(pulse.duration > 0.0))
        throw std::domain_error("PulseSpec: duration must be > 0");
    if (pulse.amplitude == params.v_set)
        return PulsePolarity::set;
    if (pulse.amplitude == params.v_reset)
        return PulsePolarity::reset;
    throw std::domain_error("PulseSpec: amplitude " + std::to_string(pulse.amplitude) +
                            " V is not a calibrated set/reset amplitude");
}

inline void check_in_window(const DeviceParams& params, double g0) {
    if (!(g0 >= params.g_min) || !(g0 <= params.g_max))
        throw std::domain_error("conductance outside [g_min, g_max]");
}

// Draws the frozen device-to-device factor k_dev ~ N(1, sigma_d2d),
// re-drawn until positive. With d2d disabled the caller sets k_dev = 1.
inline DeviceState sample_device(const DeviceParams& params, double g0, Rng& rng) {
    check_in_window(params, g0);
    double k = 1.0;
    if (params.sigma_d2d > 0.0) {
        do {
            k = rng.normal(1.0, params.sigma_d2d);
        } while (!(k > 0.0));
    }
    return DeviceState{g0, k};
}

// Expected noise-free conductance change for one pulse at state g0.
inline double expected_update(const DeviceParams& params, double g0, const PulseSpec& pulse) {
    check_in_window(params, g0);
    const double range = params.g_max - params.g_min;
    switch (pulse_polarity(params, pulse)) {
    case PulsePolarity::set: {
        const double headroom = std::max(0.0, (params.g_max - g0) / range);
        return params.a_set * std::pow(headroom, params.gamma);
    }
    case PulsePolarity::reset: {
        const double headroom = std::max(0.0, (g0 - params.g_min) / range);
        return -params.a_reset * std::pow(headroom, params.gamma);
    }
    }
    return 0.0; // unreachable
}

// Applies one pulse: delta = k_dev * D_m + eps, with eps ~ N(0, sigma_c2c*|D_m|)
// per pulse. The new conductance is clamped to the physical window; the
// returned delta is the post-clamp realized change.
inline std::pair<DeviceState, double>
apply_pulse(const DeviceState& state, const DeviceParams& params, const PulseSpec& pulse,
            const NoiseFlags& flags, Rng& rng) {
    const double dm = expected_update(params, state.g, pulse);
    double delta = (flags.d2d ? state.k_dev : 1.0) * dm;
    if (flags.c2c && params.sigma_c2c > 0.0 && dm != 0.0)
        delta += rng.normal(0.0, params.sigma_c2c * std::abs(dm));
    const double g_new = std::clamp(state.g + delta, params.g_min, params.g_max);
    return {DeviceState{g_new, state.k_dev}, g_new - state.g};
}

// Noisy static read: g * (1 + nu), nu ~ N(0, sigma_read). Result stays
// positive even in the (astronomically unlikely) nu < -1 tail.
inline double read_conductance(const DeviceState& state, const DeviceParams& params,
                               const NoiseFlags& flags, Rng& rng) {
    double g = state.g;
    if (flags.read_noise && params.sigma_read > 0.0)
        g *= 1.0 + rng.normal(0.0, params.sigma_read);
    return std::max(g, std::numeric_limits<double>::min());
}

} // namespace xbarlstm
