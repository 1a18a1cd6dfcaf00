// Experiment runner: trains the crossbar/digital variants from a flat
// config file and emits the energy/area comparison tables.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xbarlstm/xbarlstm.hpp"

namespace {

int fail_json(const std::string& kind, const std::vector<std::string>& details, int code) {
    nlohmann::json err;
    err["error"] = kind;
    err["details"] = details;
    std::cout << err.dump() << std::endl;
    return code;
}

int run_command(const std::string& config_path, const std::optional<std::string>& variant,
                const std::optional<std::uint64_t>& seed,
                const std::optional<std::size_t>& epochs, const std::optional<std::string>& out,
                const std::optional<std::size_t>& replicas) {
    auto kv = xbarlstm::parse_flat_config_file(config_path);
    if (variant)
        kv["run.variant"] = *variant;
    if (seed)
        kv["run.seed"] = std::to_string(*seed);
    if (epochs)
        kv["training.epochs"] = std::to_string(*epochs);
    if (out)
        kv["run.out"] = *out;
    if (replicas)
        kv["run.replicas"] = std::to_string(*replicas);

    const xbarlstm::ExperimentConfig cfg = xbarlstm::config_from_keys(kv);
    const nlohmann::json report = xbarlstm::run_experiment(cfg);

    std::cout << "variant: " << report["variant"].get<std::string>() << '\n';
    std::cout << "test RMSE (normalized, median): "
              << report["aggregate"]["test_rmse_normalized_median"].get<double>() << '\n';
    std::cout << "test RMSE (passengers, median): "
              << report["aggregate"]["test_rmse_passengers_median"].get<double>() << '\n';
    if (report["aggregate"].contains("energy_total_J_median"))
        std::cout << "training energy (J, median): "
                  << report["aggregate"]["energy_total_J_median"].get<double>() << '\n';
    std::cout << "report: " << (cfg.output_dir / "report.json").generic_string() << '\n';
    return 0;
}

int compare_command(const std::vector<std::string>& inputs, const std::string& out_dir) {
    std::vector<nlohmann::json> reports;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open report " + path);
        reports.push_back(nlohmann::json::parse(in));
    }
    const nlohmann::json table = xbarlstm::comparison_report(reports);
    const std::filesystem::path dir(out_dir);
    xbarlstm::write_comparison_csv(dir / "comparison.csv", table);
    {
        auto jout = xbarlstm::open_output(dir / "comparison.json");
        jout << table.dump(2) << '\n';
    }
    std::cout << "comparison: " << (dir / "comparison.csv").generic_string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LSTM on a passive RRAM crossbar: in-situ training simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> variant;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::string> out;
    std::optional<std::size_t> replicas;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("--config", config_path, "flat key = value config file")->required();
    run->add_option("--variant", variant, "digital | crossbar_ideal | crossbar_noisy");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--epochs", epochs, "training epochs");
    run->add_option("--out", out, "output directory");
    run->add_option("--replicas", replicas, "number of replicas (seeds seed..seed+n-1)");

    std::vector<std::string> inputs;
    std::string compare_out = "out";
    CLI::App* compare = app.add_subcommand("compare", "energy/area comparison from run reports");
    compare->add_option("--inputs", inputs, "report.json files")->required()->expected(-1);
    compare->add_option("--out", compare_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        return fail_json("cli", {e.what()}, app.exit(e, std::cerr, std::cerr));
    }

    try {
        if (run->parsed())
            return run_command(config_path, variant, seed, epochs, out, replicas);
        return compare_command(inputs, compare_out);
    } catch (const xbarlstm::ConfigError& e) {
        return fail_json("config", e.issues(), 2);
    } catch (const std::exception& e) {
        return fail_json("runtime", {e.what()}, 1);
    }
}
