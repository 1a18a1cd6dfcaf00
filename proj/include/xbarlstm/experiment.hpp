#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xbarlstm/config.hpp"
#include "xbarlstm/crossbar.hpp"
#include "xbarlstm/data.hpp"
#include "xbarlstm/io.hpp"
#include "xbarlstm/metrics.hpp"
#include "xbarlstm/network.hpp"
#include "xbarlstm/training.hpp"

namespace xbarlstm {

// The physical array of the reference implementation.
inline constexpr std::size_t kArrayRows = 64;
inline constexpr std::size_t kArrayCols = 64;

// Analytic constants for the active 1T-1R comparison. The reference energy
// model assumes an average conductance of 500 uS driven at 2.5 V (set) and
// 1.7 V (reset); the published totals are 145 uJ over 800 epochs and about
// 35 uJ at the 200-epoch mark, a factor of roughly 51.7 above the passive
// array. Cell footprints: 0.36 um^2 passive vs 2360 um^2 1T-1R.
struct AnalyticReference {
    double avg_g_1t1r = 500e-6;           // S
    double v_set_1t1r = 2.5;              // V
    double v_reset_1t1r = 1.7;            // V
    double active_energy_800ep_j = 145e-6;
    double active_energy_200ep_j = 35e-6;
    double energy_ratio = 51.7;           // active/passive at convergence
    std::size_t area_rows = 40;
    std::size_t area_cols = 64;
    double passive_cell_um2 = 0.36;
    double active_cell_um2 = 2360.0;
    double area_ratio = 6.5e3;
};

struct SingleRunResult {
    std::uint64_t seed = 0;
    std::vector<double> train_loss; // epochs + 1 entries, entry e = after e updates
    std::vector<double> test_loss;  // digital monitoring on the weight view
    double test_rmse_norm = 0.0;
    double test_rmse_passengers = 0.0;
    double total_energy_j = 0.0;
    std::size_t pulses_set = 0;
    std::size_t pulses_reset = 0;
    std::vector<std::string> data_warnings;
    nlohmann::json files; // relative artifact paths
};

namespace detail {

inline nlohmann::json layout_json(const NetworkLayout& layout) {
    auto rect = [](const Rect& r) {
        return nlohmann::json{
            {"row0", r.row0}, {"col0", r.col0}, {"n_rows", r.n_rows}, {"n_cols", r.n_cols}};
    };
    return nlohmann::json{
        {"n_hidden", layout.n_hidden},
        {"n_input", layout.n_input},
        {"v_read_V", layout.v_read},
        {"g2w_ratio_S_per_weight", layout.g2w_ratio},
        {"gate_column_order", {"a", "i", "o", "f"}},
        {"pair_scheme", "logical input i -> rows (2i, 2i+1) = (G+, G-); W = (G+ - G-)/g2w"},
        {"lstm_block", rect(layout.partition.lstm_block)},
        {"dense_block", rect(layout.partition.dense_block)},
    };
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["run"] = {{"variant", to_string(cfg.variant)},
                {"seed", cfg.seed},
                {"replicas", cfg.replicas},
                {"data", cfg.data_path.generic_string()},
                {"out", cfg.output_dir.generic_string()},
                {"strict_data", cfg.strict_data},
                {"snapshot_epochs", cfg.snapshot_epochs}};
    j["device"] = {{"g_min", cfg.device.g_min},
                   {"g_max", cfg.device.g_max},
                   {"a_set", cfg.device.a_set},
                   {"a_reset", cfg.device.a_reset},
                   {"gamma", cfg.device.gamma},
                   {"sigma_d2d", cfg.device.sigma_d2d},
                   {"sigma_c2c", cfg.device.sigma_c2c},
                   {"sigma_read", cfg.device.sigma_read},
                   {"v_set", cfg.device.v_set},
                   {"v_reset", cfg.device.v_reset}};
    j["training"] = {{"alpha", cfg.training.alpha},
                     {"eta", cfg.training.eta},
                     {"g2w_ratio", cfg.training.g2w_ratio},
                     {"v_set", cfg.training.v_set},
                     {"v_reset", cfg.training.v_reset},
                     {"t_p", cfg.training.t_p},
                     {"epochs", cfg.training.epochs},
                     {"granularity", to_string(cfg.training.granularity)}};
    j["network"] = {{"n_hidden", cfg.n_hidden}, {"v_read", cfg.v_read}};
    const NoiseFlags flags = cfg.resolved_flags();
    j["noise"] = {{"d2d", flags.d2d}, {"c2c", flags.c2c}, {"read", flags.read_noise}};
    j["report"] = {{"area_rows", cfg.area.rows},
                   {"area_cols", cfg.area.cols},
                   {"passive_cell_um2", cfg.area.passive_cell_um2},
                   {"active_cell_um2", cfg.area.active_cell_um2}};
    return j;
}

inline std::vector<PredictionRow> prediction_rows(const TimeSeriesDataset& ds,
                                                  std::span<const double> preds_norm) {
    // preds_norm[t] predicts observation t+1.
    std::vector<PredictionRow> rows;
    rows.reserve(preds_norm.size());
    for (std::size_t t = 0; t < preds_norm.size(); ++t) {
        const std::size_t target = t + 1;
        rows.push_back(PredictionRow{target, ds.raw[target], denormalize(preds_norm[t], ds),
                                     target >= ds.split_index});
    }
    return rows;
}

inline double quantile(std::vector<double> v, double q) {
    // Linear interpolation between order statistics.
    std::sort(v.begin(), v.end());
    if (v.empty())
        return 0.0;
    if (v.size() == 1)
        return v[0];
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

} // namespace detail

// One end-to-end run of the configured variant at one seed, writing the
// per-run artifacts into out_dir. Training inputs are the first 95 pairs;
// test inference warm-starts by replaying the train segment.
inline SingleRunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::filesystem::path& out_dir) {
    const NetworkLayout layout = cfg.resolved_layout();
    layout.validate(kArrayRows, kArrayCols);
    cfg.training.validate();
    cfg.device.validate();

    LoadOptions load_opts;
    load_opts.strict = cfg.strict_data;
    LoadedSeries loaded = load_series(cfg.data_path, load_opts);
    const TimeSeriesDataset ds = make_dataset(std::move(loaded.values));
    const SupervisedData sup = make_supervised(ds);

    // Full supervised sequence: train inputs followed by test inputs.
    std::vector<double> full_inputs = sup.train_inputs;
    full_inputs.insert(full_inputs.end(), sup.test_inputs.begin(), sup.test_inputs.end());

    TrainingConfig tcfg = cfg.training;
    tcfg.flags = cfg.resolved_flags();
    tcfg.seed = seed;

    SingleRunResult res;
    res.seed = seed;
    res.data_warnings = std::move(loaded.warnings);
    res.files = nlohmann::json::object();

    const std::size_t epochs = tcfg.epochs;
    res.train_loss.reserve(epochs + 1);
    res.test_loss.reserve(epochs + 1);

    auto digital_test_mse = [&](const WeightView& w) {
        const std::vector<double> preds = digital_forward(w, layout, full_inputs);
        const std::span<const double> test_preds(preds.data() + sup.train_inputs.size(),
                                                 sup.test_inputs.size());
        return mse_loss(test_preds, sup.test_targets);
    };

    std::filesystem::create_directories(out_dir);

    if (cfg.variant == Variant::digital) {
        // Same initial weights as the crossbar variants at this seed: the
        // digital network starts from the init substream's conductance draw.
        const CrossbarArray seed_xb =
            CrossbarArray::init_random(kArrayRows, kArrayCols, cfg.device, kNoiseOff, seed);
        WeightView w0 = weight_view(seed_xb, layout);

        BaselineResult baseline = train_digital_baseline(
            tcfg, layout, sup.train_inputs, sup.train_targets, std::move(w0),
            [&](std::size_t, const WeightView& w) { res.test_loss.push_back(digital_test_mse(w)); });
        res.train_loss = baseline.loss_curve;

        const std::vector<double> preds =
            digital_forward(baseline.final_weights, layout, full_inputs);
        const std::span<const double> test_preds(preds.data() + sup.train_inputs.size(),
                                                 sup.test_inputs.size());
        res.test_rmse_norm = rmse(test_preds, sup.test_targets);
        res.test_rmse_passengers = res.test_rmse_norm * (ds.norm_max - ds.norm_min);

        write_predictions_csv(out_dir / "predictions.csv",
                              detail::prediction_rows(ds, preds));
        res.files["predictions_csv"] = "predictions.csv";
    } else {
        CrossbarArray xb = CrossbarArray::init_random(kArrayRows, kArrayCols, cfg.device,
                                                      tcfg.flags, seed);

        auto snapshot_name = [](std::size_t epoch) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "conductance_epoch_%04zu.csv", epoch);
            return std::string(buf);
        };
        nlohmann::json snapshot_files = nlohmann::json::array();
        auto maybe_snapshot = [&](std::size_t epoch) {
            for (std::size_t s : cfg.snapshot_epochs)
                if (s == epoch) {
                    const std::string name = snapshot_name(epoch);
                    write_conductance_csv(out_dir / name, xb);
                    snapshot_files.push_back(name);
                    return;
                }
        };

        maybe_snapshot(0);
        GradientTensors grad_state = GradientTensors::zeros(layout);
        for (std::size_t e = 1; e <= epochs; ++e) {
            res.test_loss.push_back(digital_test_mse(weight_view(xb, layout)));
            const EpochRecord rec = train_epoch(xb, layout, tcfg, sup.train_inputs,
                                                sup.train_targets, grad_state, e);
            res.train_loss.push_back(rec.train_mse);
            maybe_snapshot(e);
        }

        // Final state: one analog pass over the whole series gives the
        // closing train loss and the warm-started test predictions.
        const std::vector<double> preds = forward_sequence(xb, layout, full_inputs);
        const std::span<const double> train_preds(preds.data(), sup.train_inputs.size());
        const std::span<const double> test_preds(preds.data() + sup.train_inputs.size(),
                                                 sup.test_inputs.size());
        res.train_loss.push_back(mse_loss(train_preds, sup.train_targets));
        res.test_loss.push_back(digital_test_mse(weight_view(xb, layout)));
        res.test_rmse_norm = rmse(test_preds, sup.test_targets);
        res.test_rmse_passengers = res.test_rmse_norm * (ds.norm_max - ds.norm_min);

        res.total_energy_j = xb.ledger().cumulative_energy();
        res.pulses_set = xb.ledger().pulses_set();
        res.pulses_reset = xb.ledger().pulses_reset();

        write_energy_csv(out_dir / "energy.csv", xb.ledger().energy_per_epoch());
        write_predictions_csv(out_dir / "predictions.csv", detail::prediction_rows(ds, preds));
        res.files["energy_csv"] = "energy.csv";
        res.files["predictions_csv"] = "predictions.csv";
        res.files["conductance_snapshots"] = snapshot_files;
    }

    write_loss_csv(out_dir / "loss.csv", res.train_loss, res.test_loss);
    res.files["loss_csv"] = "loss.csv";
    return res;
}

// Full experiment: replicas at seeds seed+0..replicas-1, artifact directory
// per replica when more than one, aggregate statistics, one report JSON.
inline nlohmann::json run_experiment(const ExperimentConfig& cfg) {
    throw_if_invalid(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<SingleRunResult> runs;
    runs.reserve(cfg.replicas);
    for (std::size_t k = 0; k < cfg.replicas; ++k) {
        const std::filesystem::path out_dir =
            cfg.replicas == 1 ? cfg.output_dir
                              : cfg.output_dir / ("replica_" + std::to_string(k));
        runs.push_back(run_single(cfg, cfg.seed + k, out_dir));
    }

    const AreaReport area = area_report(cfg.area.rows, cfg.area.cols, cfg.area.passive_cell_um2,
                                        cfg.area.active_cell_um2);

    nlohmann::json report;
    report["config"] = detail::config_json(cfg);
    report["config_flat"] = to_flat_text(cfg);
    report["layout"] = detail::layout_json(cfg.resolved_layout());
    report["variant"] = to_string(cfg.variant);

    nlohmann::json run_array = nlohmann::json::array();
    std::vector<double> rmse_norm, rmse_pass;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const SingleRunResult& r = runs[k];
        rmse_norm.push_back(r.test_rmse_norm);
        rmse_pass.push_back(r.test_rmse_passengers);
        nlohmann::json jr;
        jr["seed"] = r.seed;
        jr["dir"] = cfg.replicas == 1 ? "." : ("replica_" + std::to_string(k));
        jr["initial_train_mse"] = r.train_loss.front();
        jr["final_train_mse"] = r.train_loss.back();
        jr["final_test_mse_digital"] = r.test_loss.back();
        jr["test_rmse_normalized"] = r.test_rmse_norm;
        jr["test_rmse_passengers"] = r.test_rmse_passengers;
        if (cfg.variant != Variant::digital) {
            jr["energy_total_J"] = r.total_energy_j;
            jr["pulses_set"] = r.pulses_set;
            jr["pulses_reset"] = r.pulses_reset;
        }
        jr["files"] = r.files;
        if (!r.data_warnings.empty())
            jr["data_warnings"] = r.data_warnings;
        run_array.push_back(std::move(jr));
    }
    report["runs"] = std::move(run_array);

    nlohmann::json agg;
    agg["test_rmse_normalized_median"] = detail::quantile(rmse_norm, 0.5);
    agg["test_rmse_passengers_median"] = detail::quantile(rmse_pass, 0.5);
    if (cfg.replicas > 1) {
        agg["test_rmse_normalized_iqr"] =
            detail::quantile(rmse_norm, 0.75) - detail::quantile(rmse_norm, 0.25);
        agg["test_rmse_passengers_iqr"] =
            detail::quantile(rmse_pass, 0.75) - detail::quantile(rmse_pass, 0.25);
    }
    if (cfg.variant != Variant::digital) {
        std::vector<double> energies;
        for (const auto& r : runs)
            energies.push_back(r.total_energy_j);
        agg["energy_total_J_median"] = detail::quantile(energies, 0.5);
    }
    report["aggregate"] = std::move(agg);

    report["area"] = {{"rows", cfg.area.rows},
                      {"cols", cfg.area.cols},
                      {"passive_area_um2", area.passive_area_um2},
                      {"active_area_um2", area.active_area_um2},
                      {"active_over_passive_ratio", area.ratio}};

    const auto t1 = std::chrono::steady_clock::now();
    report["wall_clock_seconds"] = std::chrono::duration<double>(t1 - t0).count();

    {
        auto out = open_output(cfg.output_dir / "report.json");
        out << report.dump(2) << '\n';
    }
    {
        auto out = open_output(cfg.output_dir / "resolved.cfg");
        out << to_flat_text(cfg);
    }
    return report;
}

// Energy and area comparison against the published active 1T-1R numbers.
// Measured rows come from run reports; reference rows are analytic.
inline nlohmann::json comparison_report(const std::vector<nlohmann::json>& run_reports,
                                        const AnalyticReference& ref = {}) {
    nlohmann::json table;
    table["reference_model_1t1r"] = {{"avg_conductance_S", ref.avg_g_1t1r},
                                     {"v_set_V", ref.v_set_1t1r},
                                     {"v_reset_V", ref.v_reset_1t1r}};

    nlohmann::json energy_rows = nlohmann::json::array();
    energy_rows.push_back({{"label", "reference:active_1t1r"},
                           {"epochs", 800},
                           {"energy_J", ref.active_energy_800ep_j},
                           {"source", "published"}});
    energy_rows.push_back({{"label", "reference:active_1t1r"},
                           {"epochs", 200},
                           {"energy_J", ref.active_energy_200ep_j},
                           {"source", "published"}});

    nlohmann::json ratio_rows = nlohmann::json::array();
    ratio_rows.push_back({{"label", "reference:active_800ep_over_passive"},
                          {"ratio", ref.energy_ratio},
                          {"source", "published"}});

    for (const auto& rep : run_reports) {
        if (!rep.contains("aggregate") || !rep["aggregate"].contains("energy_total_J_median"))
            continue; // digital runs carry no crossbar energy
        const double measured = rep["aggregate"]["energy_total_J_median"].get<double>();
        const std::string label =
            "measured:" + rep["variant"].get<std::string>() + ":seed" +
            std::to_string(rep["config"]["run"]["seed"].get<std::uint64_t>());
        const std::size_t epochs = rep["config"]["training"]["epochs"].get<std::size_t>();
        energy_rows.push_back({{"label", label},
                               {"epochs", epochs},
                               {"energy_J", measured},
                               {"source", "measured"}});
        if (measured > 0.0)
            ratio_rows.push_back({{"label", "computed:active_800ep_over_" + label},
                                  {"ratio", ref.active_energy_800ep_j / measured},
                                  {"source", "computed"}});
    }
    table["energy"] = std::move(energy_rows);
    table["energy_ratios"] = std::move(ratio_rows);

    const AreaReport area =
        area_report(ref.area_rows, ref.area_cols, ref.passive_cell_um2, ref.active_cell_um2);
    table["area"] = {{"rows", ref.area_rows},
                     {"cols", ref.area_cols},
                     {"passive_area_um2", area.passive_area_um2},
                     {"active_area_um2", area.active_area_um2},
                     {"computed_ratio", area.ratio},
                     {"published_ratio", ref.area_ratio}};
    return table;
}

inline void write_comparison_csv(const std::filesystem::path& path,
                                 const nlohmann::json& table) {
    auto out = open_output(path);
    out << "section,label,epochs,energy_J,area_um2,ratio,source\n";
    for (const auto& row : table["energy"])
        out << "energy," << row["label"].get<std::string>() << ','
            << row["epochs"].get<std::size_t>() << ','
            << format_g9(row["energy_J"].get<double>()) << ",,,"
            << row["source"].get<std::string>() << '\n';
    for (const auto& row : table["energy_ratios"])
        out << "energy_ratio," << row["label"].get<std::string>() << ",,,,"
            << format_g9(row["ratio"].get<double>()) << ','
            << row["source"].get<std::string>() << '\n';
    const auto& area = table["area"];
    out << "area,passive_crossbar,,," << format_g9(area["passive_area_um2"].get<double>())
        << ",,computed\n";
    out << "area,active_1t1r,,," << format_g9(area["active_area_um2"].get<double>())
        << ",,computed\n";
    out << "area_ratio,active_over_passive,,,," << format_g9(area["computed_ratio"].get<double>())
        << ",computed\n";
    out << "area_ratio,active_over_passive,,,," << format_g9(area["published_ratio"].get<double>())
        << ",published\n";
}

} // namespace xbarlstm
