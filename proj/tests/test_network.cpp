#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "xbarlstm/network.hpp"
#include "xbarlstm/rng.hpp"

using namespace xbarlstm;

namespace {

// All pairs equal => every logical weight is exactly zero.
CrossbarArray zero_weight_array(double g = 180e-6) {
    CrossbarArray xb = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 4);
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 64; ++c)
            xb.set_conductance(r, c, g);
    return xb;
}

} // namespace

TEST_CASE("input encoding drives only the differential pair rows") {
    const NetworkLayout layout;
    const LstmState zero = LstmState::zeros(15);

    const auto v0 = encode_lstm_input(0.0, zero, layout, 64);
    REQUIRE(v0.size() == 64);
    for (std::size_t r = 0; r < 32; ++r)
        REQUIRE(v0[r] == 0.0); // h and x pairs silent
    REQUIRE(v0[32] == Catch::Approx(0.1));  // bias pair, G+ row
    REQUIRE(v0[33] == Catch::Approx(-0.1)); // bias pair, G- row
    for (std::size_t r = 34; r < 64; ++r)
        REQUIRE(v0[r] == 0.0);

    const auto vx = encode_lstm_input(0.5, zero, layout, 64);
    REQUIRE(vx[30] == Catch::Approx(0.05)); // x pair rows (logical index 15)
    REQUIRE(vx[31] == Catch::Approx(-0.05));
    for (std::size_t r = 34; r < 64; ++r)
        REQUIRE(vx[r] == 0.0);
}

TEST_CASE("zero-weight step gives half-open gates and zero output") {
    CrossbarArray xb = zero_weight_array();
    const NetworkLayout layout;
    const LstmState next = lstm_step(xb, layout, 0.7, LstmState::zeros(15));
    for (std::size_t u = 0; u < 15; ++u) {
        REQUIRE(next.c[u] == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(next.h[u] == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("zero-weight step from unit cell state halves the carry") {
    CrossbarArray xb = zero_weight_array();
    const NetworkLayout layout;
    LstmState state = LstmState::zeros(15);
    state.c[3] = 1.0;
    const LstmState next = lstm_step(xb, layout, 0.0, state);
    // f = i = o = 1/2 and a = 0: c' = 1/2, h' = tanh(1/2)/2.
    REQUIRE(next.c[3] == Catch::Approx(0.5).margin(1e-9));
    REQUIRE(next.h[3] == Catch::Approx(0.231059).margin(1e-6));
}

TEST_CASE("analog step matches the digital replica") {
    const NetworkLayout layout;
    Rng rng(2211);
    for (int trial = 0; trial < 5; ++trial) {
        CrossbarArray xb =
            CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 900 + trial);
        const WeightView w = weight_view(xb, layout);
        LstmState state = LstmState::zeros(15);
        for (std::size_t u = 0; u < 15; ++u) {
            state.h[u] = rng.uniform(-0.99, 0.99);
            state.c[u] = rng.uniform(-1.5, 1.5);
        }
        const double x = rng.uniform01();
        const LstmState analog = lstm_step(xb, layout, x, state);
        const LstmState digital = digital_lstm_step(w, layout, x, state);
        for (std::size_t u = 0; u < 15; ++u) {
            REQUIRE(std::abs(analog.h[u] - digital.h[u]) <= 1e-9);
            REQUIRE(std::abs(analog.c[u] - digital.c[u]) <= 1e-9);
        }
    }
}

TEST_CASE("dense layer decodes the differential pair weight") {
    const NetworkLayout layout;
    CrossbarArray xb = zero_weight_array(200e-6);
    REQUIRE(dense_forward(xb, layout, LstmState::zeros(15)) == Catch::Approx(0.0).margin(1e-12));

    // Bias pair (logical input 15) at Delta G = 200 uS with ratio 1e-4 -> 2.
    const PairLocation bias = dense_pair(layout, 15);
    xb.set_conductance(bias.row_plus, bias.col, 300e-6);
    xb.set_conductance(bias.row_minus, bias.col, 100e-6);
    REQUIRE(dense_forward(xb, layout, LstmState::zeros(15)) == Catch::Approx(2.0).epsilon(1e-10));

    // Random weights against the plain dot product.
    CrossbarArray rnd = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 31);
    const WeightView w = weight_view(rnd, layout);
    Rng rng(5);
    LstmState state = LstmState::zeros(15);
    for (auto& h : state.h)
        h = rng.uniform(-0.99, 0.99);
    const double got = dense_forward(rnd, layout, state);
    const double want = digital_dense(w, layout, state);
    REQUIRE(std::abs(got - want) <= 1e-9);
}

TEST_CASE("forward_sequence tracks the digital forward pass") {
    const NetworkLayout layout;

    CrossbarArray flat = zero_weight_array();
    const std::vector<double> inputs{0.1, 0.9, 0.4};
    for (double y : forward_sequence(flat, layout, inputs))
        REQUIRE(y == Catch::Approx(0.0).margin(1e-12));

    CrossbarArray xb = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 1234);
    const WeightView w = weight_view(xb, layout);

    REQUIRE(forward_sequence(xb, layout, std::vector<double>{0.3}).size() == 1);

    // 95-step series, the training-segment length.
    std::vector<double> series(95);
    Rng rng(77);
    for (auto& x : series)
        x = rng.uniform01();
    const auto analog = forward_sequence(xb, layout, series);
    const auto digital = digital_forward(w, layout, series);
    REQUIRE(analog.size() == digital.size());
    for (std::size_t t = 0; t < analog.size(); ++t)
        REQUIRE(std::abs(analog[t] - digital[t]) <= 1e-8);
}

TEST_CASE("weight_view inverts the differential encoding") {
    const NetworkLayout layout;
    CrossbarArray xb = zero_weight_array();
    const PairLocation loc = lstm_pair(layout, 0, 0);
    xb.set_conductance(loc.row_plus, loc.col, 300e-6);
    xb.set_conductance(loc.row_minus, loc.col, 100e-6);
    const WeightView w = weight_view(xb, layout);
    REQUIRE(w.lstm(0, 0) == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(w.lstm(0, 1) == 0.0);
    REQUIRE(w.dense[0] == 0.0);

    CrossbarArray rnd = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 2);
    const WeightView wr = weight_view(rnd, layout);
    for (std::size_t i = 0; i < layout.lstm_inputs(); ++i)
        for (std::size_t j = 0; j < layout.lstm_outputs(); ++j) {
            REQUIRE(wr.lstm(i, j) >= -2.0);
            REQUIRE(wr.lstm(i, j) <= 2.0);
        }
    for (double v : wr.dense) {
        REQUIRE(v >= -2.0);
        REQUIRE(v <= 2.0);
    }
}

TEST_CASE("encode/decode round trip recovers u^T W") {
    const NetworkLayout layout;
    CrossbarArray xb = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 11);
    const WeightView w = weight_view(xb, layout);
    Rng rng(6);

    LstmState state = LstmState::zeros(15);
    for (auto& h : state.h)
        h = rng.uniform(-0.99, 0.99);
    const double x = rng.uniform01();

    std::vector<double> u(state.h.begin(), state.h.end());
    u.push_back(x);
    u.push_back(1.0);

    const auto v = encode_lstm_input(x, state, layout, 64);
    const Rect& block = layout.partition.lstm_block;
    const auto currents = xb.vmm_block_rows_to_cols(block, std::span(v).first(block.n_rows));
    for (std::size_t j = 0; j < layout.lstm_outputs(); ++j) {
        const double z = currents[j] / (layout.v_read * layout.g2w_ratio);
        double want = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            want += u[i] * w.lstm(i, j);
            scale += std::abs(u[i] * w.lstm(i, j));
        }
        REQUIRE(std::abs(z - want) <= 1e-10 * std::max(scale, 1.0));
    }
}

TEST_CASE("every logical weight maps to a unique pair location") {
    const NetworkLayout layout;
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    auto add = [&](const PairLocation& loc) {
        REQUIRE(loc.row_plus + 1 == loc.row_minus);
        seen.insert({loc.row_plus, loc.row_minus, loc.col});
    };
    for (std::size_t i = 0; i < layout.lstm_inputs(); ++i)
        for (std::size_t j = 0; j < layout.lstm_outputs(); ++j)
            add(lstm_pair(layout, i, j));
    for (std::size_t i = 0; i < layout.dense_inputs(); ++i)
        add(dense_pair(layout, i));
    REQUIRE(seen.size() == 17 * 60 + 16);
    REQUIRE_THROWS_AS(lstm_pair(layout, 17, 0), std::domain_error);
    REQUIRE_THROWS_AS(dense_pair(layout, 16), std::domain_error);
}

TEST_CASE("gate outputs stay inside their ranges") {
    const NetworkLayout layout;
    CrossbarArray xb = CrossbarArray::init_random(64, 64, DeviceParams{}, kNoiseOff, 64);
    LstmState state = LstmState::zeros(15);
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        state = lstm_step(xb, layout, rng.uniform01(), state);
        for (std::size_t u = 0; u < 15; ++u)
            REQUIRE(std::abs(state.h[u]) < 1.0);
    }
}
