#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "xbarlstm/device.hpp"
#include "xbarlstm/rng.hpp"

namespace xbarlstm {

struct Rect {
    std::size_t row0 = 0;
    std::size_t col0 = 0;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    bool fits_within(std::size_t rows, std::size_t cols) const {
        return row0 + n_rows <= rows && col0 + n_cols <= cols;
    }
};

// Pulse/energy bookkeeping. Pulse energies accumulate into an open epoch
// bucket; close_epoch() seals the bucket so cumulative energy is always the
// sum of the per-epoch entries plus whatever is still open.
class EnergyLedger {
public:
    void add_pulse(PulsePolarity polarity, double energy_j) {
        if (polarity == PulsePolarity::set)
            ++pulses_set_;
        else
            ++pulses_reset_;
        open_epoch_energy_ += energy_j;
    }

    void close_epoch() {
        energy_per_epoch_.push_back(open_epoch_energy_);
        open_epoch_energy_ = 0.0;
    }

    std::size_t pulses_set() const { return pulses_set_; }
    std::size_t pulses_reset() const { return pulses_reset_; }
    const std::vector<double>& energy_per_epoch() const { return energy_per_epoch_; }
    double open_epoch_energy() const { return open_epoch_energy_; }

    double cumulative_energy() const {
        double acc = 0.0;
        for (double e : energy_per_epoch_)
            acc += e;
        return acc + open_epoch_energy_;
    }

private:
    std::size_t pulses_set_ = 0;
    std::size_t pulses_reset_ = 0;
    std::vector<double> energy_per_epoch_;
    double open_epoch_energy_ = 0.0;
};

// Passive RRAM crossbar: ideal virtual-ground sensing, so each output line
// current is an independent Ohm/Kirchhoff sum. Row voltages are capped well
// below the programming amplitudes so reads never disturb stored state.
class CrossbarArray {
public:
    static constexpr double kReadVoltageLimit = 0.2; // V

    CrossbarArray(std::size_t n_rows, std::size_t n_cols, DeviceParams params, NoiseFlags flags,
                  std::uint64_t seed)
        : rows_(n_rows), cols_(n_cols), params_(params), flags_(flags),
          rng_c2c_(substream(seed, "c2c")), rng_read_(substream(seed, "read")) {
        if (n_rows == 0 || n_cols == 0)
            throw std::domain_error("CrossbarArray: dimensions must be positive");
        params_.validate();
        cells_.resize(rows_ * cols_);
    }

    // Conductances drawn uniformly inside the device window; per-device step
    // factors drawn from their own substream so enabling d2d never perturbs
    // the initial conductance map.
    static CrossbarArray init_random(std::size_t n_rows, std::size_t n_cols,
                                     const DeviceParams& params, const NoiseFlags& flags,
                                     std::uint64_t seed) {
        CrossbarArray xb(n_rows, n_cols, params, flags, seed);
        Rng rng_init = substream(seed, "init");
        Rng rng_d2d = substream(seed, "d2d");
        for (auto& cell : xb.cells_) {
            const double g0 = rng_init.uniform(params.g_min, params.g_max);
            cell = flags.d2d ? sample_device(params, g0, rng_d2d) : DeviceState{g0, 1.0};
        }
        return xb;
    }

    std::size_t n_rows() const { return rows_; }
    std::size_t n_cols() const { return cols_; }
    const DeviceParams& params() const { return params_; }
    const NoiseFlags& flags() const { return flags_; }
    EnergyLedger& ledger() { return ledger_; }
    const EnergyLedger& ledger() const { return ledger_; }

    const DeviceState& cell(std::size_t r, std::size_t c) const {
        check_index(r, c);
        return cells_[r * cols_ + c];
    }

    // Direct state installation, e.g. importing a tuned conductance map.
    void set_conductance(std::size_t r, std::size_t c, double g) {
        check_index(r, c);
        check_in_window(params_, g);
        cells_[r * cols_ + c].g = g;
    }

    // Forward VMM: row voltages in, column currents out. I_j = sum_i v_i*G_ij,
    // each conductance seen through the (possibly noisy) read path.
    std::vector<double> vmm_rows_to_cols(std::span<const double> v_in) {
        return vmm_block_rows_to_cols(Rect{0, 0, rows_, cols_}, v_in);
    }

    // Transposed VMM: column voltages in, row currents out.
    std::vector<double> vmm_cols_to_rows(std::span<const double> v_in) {
        return vmm_block_cols_to_rows(Rect{0, 0, rows_, cols_}, v_in);
    }

    // Partition-aware forward VMM: only the block's columns are sensed and
    // only its rows are driven; all other rows sit at virtual ground and
    // contribute no current. Read-noise draws happen column-major over the
    // block, one per cell per call.
    std::vector<double> vmm_block_rows_to_cols(const Rect& block, std::span<const double> v_in) {
        check_block(block);
        check_voltages(v_in, block.n_rows);
        std::vector<double> currents(block.n_cols, 0.0);
        for (std::size_t j = 0; j < block.n_cols; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < block.n_rows; ++i) {
                const DeviceState& s = cells_[(block.row0 + i) * cols_ + (block.col0 + j)];
                acc += v_in[i] * read_conductance(s, params_, flags_, rng_read_);
            }
            currents[j] = acc;
        }
        return currents;
    }

    std::vector<double> vmm_block_cols_to_rows(const Rect& block, std::span<const double> v_in) {
        check_block(block);
        check_voltages(v_in, block.n_cols);
        std::vector<double> currents(block.n_rows, 0.0);
        for (std::size_t i = 0; i < block.n_rows; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < block.n_cols; ++j) {
                const DeviceState& s = cells_[(block.row0 + i) * cols_ + (block.col0 + j)];
                acc += v_in[j] * read_conductance(s, params_, flags_, rng_read_);
            }
            currents[i] = acc;
        }
        return currents;
    }

    // Programs one cell and charges the ledger with E = V^2 * G_before * t_p,
    // where G_before is the stored (noise-free) state.
    double program_pulse(std::size_t r, std::size_t c, const PulseSpec& pulse) {
        check_index(r, c);
        const PulsePolarity polarity = pulse_polarity(params_, pulse);
        DeviceState& s = cells_[r * cols_ + c];
        const double g_before = s.g;
        auto [next, delta] = apply_pulse(s, params_, pulse, flags_, rng_c2c_);
        s = next;
        ledger_.add_pulse(polarity, pulse.amplitude * pulse.amplitude * g_before * pulse.duration);
        return delta;
    }

private:
    void check_index(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_)
            throw std::domain_error("CrossbarArray: cell index out of range");
    }

    void check_block(const Rect& block) const {
        if (block.n_rows == 0 || block.n_cols == 0 || !block.fits_within(rows_, cols_))
            throw std::domain_error("CrossbarArray: block outside array bounds");
    }

    static void check_voltages(std::span<const double> v_in, std::size_t expected) {
        if (v_in.size() != expected)
            throw std::invalid_argument("CrossbarArray: voltage vector length mismatch");
        for (double v : v_in)
            if (!(std::abs(v) <= kReadVoltageLimit))
                throw std::domain_error("CrossbarArray: read voltage exceeds safe limit");
    }

    std::size_t rows_, cols_;
    DeviceParams params_;
    NoiseFlags flags_;
    std::vector<DeviceState> cells_;
    Rng rng_c2c_;
    Rng rng_read_;
    EnergyLedger ledger_;
};

// Fixed placement of both layers on one physical array. Blocks are
// time-multiplexed: an LSTM read drives rows 0..33 and senses the 60 gate
// columns; a dense read drives rows 0..31 and senses only the dense column.
struct PartitionMap {
    Rect lstm_block;
    Rect dense_block;

    static PartitionMap for_layer_sizes(std::size_t lstm_inputs, std::size_t lstm_outputs,
                                        std::size_t dense_inputs) {
        PartitionMap pm;
        pm.lstm_block = Rect{0, 0, 2 * lstm_inputs, lstm_outputs};
        pm.dense_block = Rect{0, lstm_outputs, 2 * dense_inputs, 1};
        return pm;
    }

    void validate_within(std::size_t n_rows, std::size_t n_cols) const {
        if (!lstm_block.fits_within(n_rows, n_cols) || !dense_block.fits_within(n_rows, n_cols))
            throw std::domain_error("PartitionMap: block outside crossbar bounds");
    }
};

struct AreaReport {
    double passive_area_um2;
    double active_area_um2;
    double ratio; // active / passive
};

// Pure arithmetic on cell footprints; the default comparison uses a 40x64
// array with 0.36 um^2 passive cells against 2360 um^2 1T-1R cells.
inline AreaReport area_report(std::size_t n_rows, std::size_t n_cols, double passive_cell_um2,
                              double active_cell_um2) {
    if (n_rows == 0 || n_cols == 0 || !(passive_cell_um2 > 0.0) || !(active_cell_um2 > 0.0))
        throw std::domain_error("area_report: dimensions and cell areas must be positive");
    const double n = static_cast<double>(n_rows) * static_cast<double>(n_cols);
    AreaReport r;
    r.passive_area_um2 = n * passive_cell_um2;
    r.active_area_um2 = n * active_cell_um2;
    r.ratio = r.active_area_um2 / r.passive_area_um2;
    return r;
}

} // namespace xbarlstm
