#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "xbarlstm/crossbar.hpp"
#include "xbarlstm/matrix.hpp"

namespace xbarlstm {

// Gate column groups, each n_hidden wide, in this fixed order.
enum class Gate : std::size_t { a = 0, i = 1, o = 2, f = 3 };

// Recurrent network of one LSTM layer feeding a single-output dense layer.
// Every logical weight is a differential conductance pair on the crossbar,
// W = (G+ - G-)/g2w_ratio, with pair i occupying adjacent rows (2i, 2i+1).
// Biases are trained weights on the constant-1 input row.
struct NetworkLayout {
    std::size_t n_hidden = 15;
    std::size_t n_input = 1;
    double v_read = 0.1;     // V, applied per unit logical input
    double g2w_ratio = 1e-4; // S per unit weight
    PartitionMap partition = PartitionMap::for_layer_sizes(17, 60, 16);

    std::size_t lstm_inputs() const { return n_hidden + n_input + 1; } // [h, x, bias]
    std::size_t lstm_outputs() const { return 4 * n_hidden; }
    std::size_t dense_inputs() const { return n_hidden + 1; } // [h, bias]

    std::size_t gate_col(Gate gate, std::size_t unit) const {
        return static_cast<std::size_t>(gate) * n_hidden + unit;
    }

    static NetworkLayout with_hidden(std::size_t n_hidden, std::size_t n_input = 1) {
        NetworkLayout layout;
        layout.n_hidden = n_hidden;
        layout.n_input = n_input;
        layout.partition = PartitionMap::for_layer_sizes(
            n_hidden + n_input + 1, 4 * n_hidden, n_hidden + 1);
        return layout;
    }

    void validate(std::size_t array_rows, std::size_t array_cols) const {
        if (n_hidden == 0 || n_input == 0)
            throw std::domain_error("NetworkLayout: need n_hidden > 0 and n_input > 0");
        if (!(v_read > 0.0) || v_read > CrossbarArray::kReadVoltageLimit)
            throw std::domain_error("NetworkLayout: v_read must be in (0, read limit]");
        if (!(g2w_ratio > 0.0))
            throw std::domain_error("NetworkLayout: g2w_ratio must be > 0");
        if (partition.lstm_block.n_rows != 2 * lstm_inputs() ||
            partition.lstm_block.n_cols != lstm_outputs() ||
            partition.dense_block.n_rows != 2 * dense_inputs() ||
            partition.dense_block.n_cols != 1)
            throw std::domain_error("NetworkLayout: partition does not match layer sizes");
        partition.validate_within(array_rows, array_cols);
    }
};

struct LstmState {
    std::vector<double> h; // hidden state, each component in (-1, 1)
    std::vector<double> c; // cell state

    static LstmState zeros(std::size_t n_hidden) {
        return LstmState{std::vector<double>(n_hidden, 0.0), std::vector<double>(n_hidden, 0.0)};
    }
};

// Digital mirror of the crossbar contents.
struct WeightView {
    Matrix lstm;               // lstm_inputs x lstm_outputs
    std::vector<double> dense; // dense_inputs

    static WeightView zeros(const NetworkLayout& layout) {
        return WeightView{Matrix(layout.lstm_inputs(), layout.lstm_outputs(), 0.0),
                          std::vector<double>(layout.dense_inputs(), 0.0)};
    }
};

// Physical location of one differential pair.
struct PairLocation {
    std::size_t row_plus;
    std::size_t row_minus;
    std::size_t col;
};

inline PairLocation lstm_pair(const NetworkLayout& layout, std::size_t input, std::size_t output) {
    const Rect& b = layout.partition.lstm_block;
    if (input >= layout.lstm_inputs() || output >= layout.lstm_outputs())
        throw std::domain_error("lstm_pair: logical index out of range");
    return PairLocation{b.row0 + 2 * input, b.row0 + 2 * input + 1, b.col0 + output};
}

inline PairLocation dense_pair(const NetworkLayout& layout, std::size_t input) {
    const Rect& b = layout.partition.dense_block;
    if (input >= layout.dense_inputs())
        throw std::domain_error("dense_pair: logical index out of range");
    return PairLocation{b.row0 + 2 * input, b.row0 + 2 * input + 1, b.col0};
}

namespace detail {

// Signed logical inputs become +u*v_read on the G+ row and -u*v_read on the
// G- row, so the differential subtraction happens in the analog sum.
inline std::vector<double> encode_pairs(std::span<const double> logical, double v_read,
                                        std::size_t vector_length) {
    std::vector<double> v(vector_length, 0.0);
    for (std::size_t i = 0; i < logical.size(); ++i) {
        v[2 * i] = logical[i] * v_read;
        v[2 * i + 1] = -logical[i] * v_read;
    }
    return v;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace detail

// Voltage vector for one LSTM read over the whole physical array:
// logical [h (n_hidden), x, 1] on the paired rows, zero padding beyond.
inline std::vector<double> encode_lstm_input(double x, const LstmState& state,
                                             const NetworkLayout& layout,
                                             std::size_t array_rows) {
    std::vector<double> logical(state.h.begin(), state.h.end());
    logical.push_back(x);
    logical.push_back(1.0);
    return detail::encode_pairs(logical, layout.v_read, array_rows);
}

inline std::vector<double> encode_dense_input(const LstmState& state, const NetworkLayout& layout,
                                              std::size_t array_rows) {
    std::vector<double> logical(state.h.begin(), state.h.end());
    logical.push_back(1.0);
    return detail::encode_pairs(logical, layout.v_read, array_rows);
}

// One analog LSTM step: block VMM for the gate pre-activations, digital
// activations, digital state update.
inline LstmState lstm_step(CrossbarArray& xb, const NetworkLayout& layout, double x,
                           const LstmState& state) {
    const Rect& block = layout.partition.lstm_block;
    const std::vector<double> v = encode_lstm_input(x, state, layout, xb.n_rows());
    const std::vector<double> currents =
        xb.vmm_block_rows_to_cols(block, std::span(v).first(block.n_rows));

    const double decode = 1.0 / (layout.v_read * layout.g2w_ratio);
    LstmState next = LstmState::zeros(layout.n_hidden);
    for (std::size_t u = 0; u < layout.n_hidden; ++u) {
        const double z_a = currents[layout.gate_col(Gate::a, u)] * decode;
        const double z_i = currents[layout.gate_col(Gate::i, u)] * decode;
        const double z_o = currents[layout.gate_col(Gate::o, u)] * decode;
        const double z_f = currents[layout.gate_col(Gate::f, u)] * decode;
        const double a = std::tanh(z_a);
        const double i = detail::sigmoid(z_i);
        const double o = detail::sigmoid(z_o);
        const double f = detail::sigmoid(z_f);
        next.c[u] = i * a + f * state.c[u];
        next.h[u] = o * std::tanh(next.c[u]);
    }
    return next;
}

// Dense read: only the dense column is sensed, rows beyond the block are
// grounded. The decoded column current is the prediction.
inline double dense_forward(CrossbarArray& xb, const NetworkLayout& layout,
                            const LstmState& state) {
    const Rect& block = layout.partition.dense_block;
    const std::vector<double> v = encode_dense_input(state, layout, xb.n_rows());
    const std::vector<double> currents =
        xb.vmm_block_rows_to_cols(block, std::span(v).first(block.n_rows));
    return currents[0] / (layout.v_read * layout.g2w_ratio);
}

// Runs the whole series from a zero state, one prediction per input.
inline std::vector<double> forward_sequence(CrossbarArray& xb, const NetworkLayout& layout,
                                            std::span<const double> inputs) {
    std::vector<double> predictions;
    predictions.reserve(inputs.size());
    LstmState state = LstmState::zeros(layout.n_hidden);
    for (double x : inputs) {
        state = lstm_step(xb, layout, x, state);
        predictions.push_back(dense_forward(xb, layout, state));
    }
    return predictions;
}

// Noise-free digital mirror of all differential pairs.
inline WeightView weight_view(const CrossbarArray& xb, const NetworkLayout& layout) {
    WeightView w = WeightView::zeros(layout);
    for (std::size_t i = 0; i < layout.lstm_inputs(); ++i)
        for (std::size_t j = 0; j < layout.lstm_outputs(); ++j) {
            const PairLocation loc = lstm_pair(layout, i, j);
            w.lstm(i, j) =
                (xb.cell(loc.row_plus, loc.col).g - xb.cell(loc.row_minus, loc.col).g) /
                layout.g2w_ratio;
        }
    for (std::size_t i = 0; i < layout.dense_inputs(); ++i) {
        const PairLocation loc = dense_pair(layout, i);
        w.dense[i] = (xb.cell(loc.row_plus, loc.col).g - xb.cell(loc.row_minus, loc.col).g) /
                     layout.g2w_ratio;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Digital reference path. The same network computed in plain floating point
// on a WeightView; the in-situ training loop differentiates this replica.

// Everything the backward pass needs, per step.
struct StepTrace {
    std::vector<double> u;      // logical LSTM input [h_prev, x, 1]
    std::vector<double> a, i, o, f;
    std::vector<double> c;      // post-update cell state
    std::vector<double> tanh_c;
    std::vector<double> c_prev;
    std::vector<double> h;      // post-update hidden state
    double y = 0.0;             // dense prediction
};

inline StepTrace digital_step(const WeightView& w, const NetworkLayout& layout, double x,
                              const LstmState& state) {
    const std::size_t n = layout.n_hidden;
    StepTrace t;
    t.u.assign(state.h.begin(), state.h.end());
    t.u.push_back(x);
    t.u.push_back(1.0);
    t.c_prev = state.c;

    std::vector<double> z(layout.lstm_outputs(), 0.0);
    for (std::size_t r = 0; r < t.u.size(); ++r) {
        const double ur = t.u[r];
        if (ur == 0.0)
            continue;
        for (std::size_t j = 0; j < z.size(); ++j)
            z[j] += ur * w.lstm(r, j);
    }

    t.a.resize(n);
    t.i.resize(n);
    t.o.resize(n);
    t.f.resize(n);
    t.c.resize(n);
    t.tanh_c.resize(n);
    t.h.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        t.a[u] = std::tanh(z[layout.gate_col(Gate::a, u)]);
        t.i[u] = detail::sigmoid(z[layout.gate_col(Gate::i, u)]);
        t.o[u] = detail::sigmoid(z[layout.gate_col(Gate::o, u)]);
        t.f[u] = detail::sigmoid(z[layout.gate_col(Gate::f, u)]);
        t.c[u] = t.i[u] * t.a[u] + t.f[u] * t.c_prev[u];
        t.tanh_c[u] = std::tanh(t.c[u]);
        t.h[u] = t.o[u] * t.tanh_c[u];
    }

    t.y = w.dense[n]; // bias row
    for (std::size_t u = 0; u < n; ++u)
        t.y += t.h[u] * w.dense[u];
    return t;
}

inline LstmState digital_lstm_step(const WeightView& w, const NetworkLayout& layout, double x,
                                   const LstmState& state) {
    StepTrace t = digital_step(w, layout, x, state);
    return LstmState{std::move(t.h), std::move(t.c)};
}

inline double digital_dense(const WeightView& w, const NetworkLayout& layout,
                            const LstmState& state) {
    double y = w.dense[layout.n_hidden];
    for (std::size_t u = 0; u < layout.n_hidden; ++u)
        y += state.h[u] * w.dense[u];
    return y;
}

inline std::vector<StepTrace> digital_forward_trace(const WeightView& w,
                                                    const NetworkLayout& layout,
                                                    std::span<const double> inputs) {
    std::vector<StepTrace> trace;
    trace.reserve(inputs.size());
    LstmState state = LstmState::zeros(layout.n_hidden);
    for (double x : inputs) {
        trace.push_back(digital_step(w, layout, x, state));
        state.h = trace.back().h;
        state.c = trace.back().c;
    }
    return trace;
}

inline std::vector<double> digital_forward(const WeightView& w, const NetworkLayout& layout,
                                           std::span<const double> inputs) {
    std::vector<double> predictions;
    predictions.reserve(inputs.size());
    for (const StepTrace& t : digital_forward_trace(w, layout, inputs))
        predictions.push_back(t.y);
    return predictions;
}

} // namespace xbarlstm
