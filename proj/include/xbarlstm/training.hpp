#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "xbarlstm/crossbar.hpp"
#include "xbarlstm/metrics.hpp"
#include "xbarlstm/network.hpp"

namespace xbarlstm {

// One Manhattan update per epoch from the full-sequence gradient (default),
// or one update per training pair with the gradient of that pair's error.
enum class UpdateGranularity { per_epoch, per_sample };

struct TrainingConfig {
    double alpha = 0.01;    // learning rate
    double eta = 0.9;       // momentum
    double g2w_ratio = 1e-4; // S per unit weight, must match the layout
    double v_set = 0.8;     // V
    double v_reset = -0.8;  // V
    double t_p = 100e-9;    // s, pulse duration
    std::size_t epochs = 200;
    NoiseFlags flags{};
    std::uint64_t seed = 0;
    UpdateGranularity granularity = UpdateGranularity::per_epoch;

    PulseSpec set_pulse() const { return PulseSpec{v_set, t_p}; }
    PulseSpec reset_pulse() const { return PulseSpec{v_reset, t_p}; }

    void validate() const {
        if (!(alpha > 0.0))
            throw std::domain_error("TrainingConfig: alpha must be > 0");
        if (!(eta >= 0.0) || !(eta < 1.0))
            throw std::domain_error("TrainingConfig: eta must be in [0, 1)");
        if (epochs < 1)
            throw std::domain_error("TrainingConfig: epochs must be >= 1");
        if (!(v_set > 0.0) || !(v_reset < 0.0))
            throw std::domain_error("TrainingConfig: require v_set > 0 > v_reset");
        if (!(t_p > 0.0))
            throw std::domain_error("TrainingConfig: t_p must be > 0");
        if (!(g2w_ratio > 0.0))
            throw std::domain_error("TrainingConfig: g2w_ratio must be > 0");
    }
};

// Gradient-shaped tensors, one entry per logical weight.
struct WeightDeltas {
    Matrix lstm;
    std::vector<double> dense;

    static WeightDeltas zeros(const NetworkLayout& layout) {
        return WeightDeltas{Matrix(layout.lstm_inputs(), layout.lstm_outputs(), 0.0),
                            std::vector<double>(layout.dense_inputs(), 0.0)};
    }
};

struct GradientTensors {
    WeightDeltas grad;     // dLoss/dW from the last backward pass
    WeightDeltas momentum; // previous desired update (Delta W^{t-1} carrier)

    static GradientTensors zeros(const NetworkLayout& layout) {
        return GradientTensors{WeightDeltas::zeros(layout), WeightDeltas::zeros(layout)};
    }
};

struct EpochRecord {
    std::size_t epoch = 0;   // 1-based update epoch
    double train_mse = 0.0;  // analog forward loss entering the epoch
    double energy_j = 0.0;   // crossbar energy spent by this epoch's pulses
    std::size_t pulses_set = 0;
    std::size_t pulses_reset = 0;
};

struct BpttResult {
    WeightDeltas grad;               // dLoss/dW
    std::vector<double> predictions; // digital forward predictions
    double loss = 0.0;
};

// Full (un-truncated) backpropagation through time over the digital replica.
// step_weights scales each step's squared error; empty means mean-squared
// error over the sequence.
inline BpttResult bptt_gradients(const WeightView& w, const NetworkLayout& layout,
                                 std::span<const double> inputs,
                                 std::span<const double> targets,
                                 std::span<const double> step_weights = {}) {
    if (inputs.size() != targets.size() || inputs.empty())
        throw std::invalid_argument("bptt_gradients: need equal nonempty input/target lengths");
    if (!step_weights.empty() && step_weights.size() != inputs.size())
        throw std::invalid_argument("bptt_gradients: step weight length mismatch");

    const std::size_t n = layout.n_hidden;
    const std::size_t steps = inputs.size();
    const std::vector<StepTrace> trace = digital_forward_trace(w, layout, inputs);

    BpttResult out;
    out.grad = WeightDeltas::zeros(layout);
    out.predictions.reserve(steps);
    for (const StepTrace& t : trace)
        out.predictions.push_back(t.y);

    const double mean_w = 1.0 / static_cast<double>(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const double lw = step_weights.empty() ? mean_w : step_weights[t];
        const double d = out.predictions[t] - targets[t];
        out.loss += lw * d * d;
    }

    std::vector<double> dh_carry(n, 0.0);
    std::vector<double> dc_carry(n, 0.0);
    std::vector<double> dz(layout.lstm_outputs(), 0.0);
    for (std::size_t ti = steps; ti-- > 0;) {
        const StepTrace& t = trace[ti];
        const double lw = step_weights.empty() ? mean_w : step_weights[ti];
        const double dy = 2.0 * lw * (t.y - targets[ti]);

        // dense layer: y = sum_u h_u * w_u + w_bias
        for (std::size_t u = 0; u < n; ++u)
            out.grad.dense[u] += dy * t.h[u];
        out.grad.dense[n] += dy;

        for (std::size_t u = 0; u < n; ++u) {
            const double dh = dy * w.dense[u] + dh_carry[u];
            const double d_o = dh * t.tanh_c[u];
            const double dc = dc_carry[u] + dh * t.o[u] * (1.0 - t.tanh_c[u] * t.tanh_c[u]);
            const double d_i = dc * t.a[u];
            const double d_a = dc * t.i[u];
            const double d_f = dc * t.c_prev[u];
            dc_carry[u] = dc * t.f[u];
            dz[layout.gate_col(Gate::a, u)] = d_a * (1.0 - t.a[u] * t.a[u]);
            dz[layout.gate_col(Gate::i, u)] = d_i * t.i[u] * (1.0 - t.i[u]);
            dz[layout.gate_col(Gate::o, u)] = d_o * t.o[u] * (1.0 - t.o[u]);
            dz[layout.gate_col(Gate::f, u)] = d_f * t.f[u] * (1.0 - t.f[u]);
        }

        for (std::size_t r = 0; r < t.u.size(); ++r) {
            const double ur = t.u[r];
            if (ur != 0.0)
                for (std::size_t j = 0; j < dz.size(); ++j)
                    out.grad.lstm(r, j) += ur * dz[j];
        }
        for (std::size_t u = 0; u < n; ++u) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dz.size(); ++j)
                acc += w.lstm(u, j) * dz[j];
            dh_carry[u] = acc;
        }
    }
    return out;
}

// Eq.-(7)-style accumulator: momentum <- alpha * grad + eta * momentum.
// Returns the refreshed momentum, which is the desired-update tensor.
inline const WeightDeltas& momentum_update(GradientTensors& gt, const TrainingConfig& cfg) {
    if (!gt.grad.lstm.same_shape(gt.momentum.lstm) ||
        gt.grad.dense.size() != gt.momentum.dense.size())
        throw std::invalid_argument("momentum_update: tensor shapes mismatch");
    auto& ml = gt.momentum.lstm.data();
    const auto& gl = gt.grad.lstm.data();
    for (std::size_t k = 0; k < ml.size(); ++k)
        ml[k] = cfg.alpha * gl[k] + cfg.eta * ml[k];
    for (std::size_t k = 0; k < gt.momentum.dense.size(); ++k)
        gt.momentum.dense[k] = cfg.alpha * gt.grad.dense[k] + cfg.eta * gt.momentum.dense[k];
    return gt.momentum;
}

enum class PairDevice { plus, minus };

struct PulseDecision {
    PulseSpec pulse;
    PairDevice target;
};

// Manhattan rule: only the sign of the desired weight change matters.
// A positive change potentiates G+, a negative one potentiates G-, zero
// issues nothing.
inline std::optional<PulseDecision> select_pulse(double delta_w, const TrainingConfig& cfg) {
    if (delta_w > 0.0)
        return PulseDecision{cfg.set_pulse(), PairDevice::plus};
    if (delta_w < 0.0)
        return PulseDecision{cfg.set_pulse(), PairDevice::minus};
    return std::nullopt;
}

// Issues the single physical pulse for one logical weight. When the target
// device has no headroom left at g_max, the complementary device receives a
// reset pulse instead, which moves the pair weight in the same direction.
inline void apply_weight_pulse(CrossbarArray& xb, const PairLocation& loc,
                               const PulseDecision& decision, const TrainingConfig& cfg) {
    const std::size_t target_row =
        decision.target == PairDevice::plus ? loc.row_plus : loc.row_minus;
    const std::size_t other_row =
        decision.target == PairDevice::plus ? loc.row_minus : loc.row_plus;
    if (xb.cell(target_row, loc.col).g >= xb.params().g_max)
        xb.program_pulse(other_row, loc.col, cfg.reset_pulse());
    else
        xb.program_pulse(target_row, loc.col, decision.pulse);
}

namespace detail {

// The desired weight change is the descent step -DeltaW^t; potentiation of
// G+ must lower the loss, so the accumulated gradient direction is negated
// before pulse selection.
inline void issue_manhattan_pulses(CrossbarArray& xb, const NetworkLayout& layout,
                                   const TrainingConfig& cfg, const WeightDeltas& desired_neg) {
    for (std::size_t i = 0; i < layout.lstm_inputs(); ++i)
        for (std::size_t j = 0; j < layout.lstm_outputs(); ++j)
            if (auto decision = select_pulse(-desired_neg.lstm(i, j), cfg))
                apply_weight_pulse(xb, lstm_pair(layout, i, j), *decision, cfg);
    for (std::size_t i = 0; i < layout.dense_inputs(); ++i)
        if (auto decision = select_pulse(-desired_neg.dense[i], cfg))
            apply_weight_pulse(xb, dense_pair(layout, i), *decision, cfg);
}

} // namespace detail

// One in-situ training epoch: analog forward pass for the loss, digital BPTT
// on the noise-free weight view, momentum accumulation, then at most one
// fixed-amplitude pulse per logical weight.
inline EpochRecord train_epoch(CrossbarArray& xb, const NetworkLayout& layout,
                               const TrainingConfig& cfg, std::span<const double> inputs,
                               std::span<const double> targets, GradientTensors& grad_state,
                               std::size_t epoch_index) {
    if (inputs.size() != targets.size() || inputs.empty())
        throw std::invalid_argument("train_epoch: need equal nonempty input/target lengths");

    EpochRecord record;
    record.epoch = epoch_index;
    const std::size_t set_before = xb.ledger().pulses_set();
    const std::size_t reset_before = xb.ledger().pulses_reset();

    if (cfg.granularity == UpdateGranularity::per_epoch) {
        const std::vector<double> predictions = forward_sequence(xb, layout, inputs);
        record.train_mse = mse_loss(predictions, targets);

        grad_state.grad = bptt_gradients(weight_view(xb, layout), layout, inputs, targets).grad;
        const WeightDeltas& update = momentum_update(grad_state, cfg);
        detail::issue_manhattan_pulses(xb, layout, cfg, update);
    } else {
        // Online variant: one update after every training pair, driven by the
        // gradient of that pair's squared error backpropagated through the
        // whole prefix under the current weights.
        std::vector<double> predictions;
        predictions.reserve(inputs.size());
        std::vector<double> step_weights;
        LstmState state = LstmState::zeros(layout.n_hidden);
        for (std::size_t t = 0; t < inputs.size(); ++t) {
            state = lstm_step(xb, layout, inputs[t], state);
            predictions.push_back(dense_forward(xb, layout, state));

            step_weights.assign(t + 1, 0.0);
            step_weights.back() = 1.0;
            grad_state.grad = bptt_gradients(weight_view(xb, layout), layout,
                                             inputs.subspan(0, t + 1), targets.subspan(0, t + 1),
                                             step_weights)
                                  .grad;
            const WeightDeltas& update = momentum_update(grad_state, cfg);
            detail::issue_manhattan_pulses(xb, layout, cfg, update);
        }
        record.train_mse = mse_loss(predictions, targets);
    }

    xb.ledger().close_epoch();
    record.energy_j = xb.ledger().energy_per_epoch().back();
    record.pulses_set = xb.ledger().pulses_set() - set_before;
    record.pulses_reset = xb.ledger().pulses_reset() - reset_before;
    return record;
}

struct BaselineResult {
    std::vector<double> loss_curve; // epochs + 1 entries; entry e = loss after e updates
    WeightView final_weights;
};

// Float-precision reference: same architecture, same gradients, continuous
// weight updates W <- W - DeltaW^t with no pulse quantization. The observer,
// when set, sees the weights after every update (epoch 0 = initial weights).
inline BaselineResult
train_digital_baseline(const TrainingConfig& cfg, const NetworkLayout& layout,
                       std::span<const double> inputs, std::span<const double> targets,
                       WeightView w,
                       const std::function<void(std::size_t, const WeightView&)>& observer = {}) {
    BaselineResult out;
    out.loss_curve.reserve(cfg.epochs + 1);
    GradientTensors gt = GradientTensors::zeros(layout);
    if (observer)
        observer(0, w);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        BpttResult r = bptt_gradients(w, layout, inputs, targets);
        out.loss_curve.push_back(r.loss);
        gt.grad = std::move(r.grad);
        const WeightDeltas& update = momentum_update(gt, cfg);
        auto& wl = w.lstm.data();
        const auto& ul = update.lstm.data();
        for (std::size_t k = 0; k < wl.size(); ++k)
            wl[k] -= ul[k];
        for (std::size_t k = 0; k < w.dense.size(); ++k)
            w.dense[k] -= update.dense[k];
        if (observer)
            observer(e + 1, w);
    }
    out.loss_curve.push_back(mse_loss(digital_forward(w, layout, inputs), targets));
    out.final_weights = std::move(w);
    return out;
}

} // namespace xbarlstm
