#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbarlstm/data.hpp"
#include "xbarlstm/device.hpp"
#include "xbarlstm/io.hpp"
#include "xbarlstm/network.hpp"
#include "xbarlstm/training.hpp"

namespace xbarlstm {

enum class Variant { digital, crossbar_ideal, crossbar_noisy };

inline std::string to_string(Variant v) {
    switch (v) {
    case Variant::digital: return "digital";
    case Variant::crossbar_ideal: return "crossbar_ideal";
    case Variant::crossbar_noisy: return "crossbar_noisy";
    }
    return "?";
}

inline std::string to_string(UpdateGranularity g) {
    return g == UpdateGranularity::per_epoch ? "per_epoch" : "per_sample";
}

// Carries every violated field at once so one failed run reports the whole
// problem, not just the first field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string msg = "invalid configuration:";
        for (const auto& s : issues)
            msg += "\n  - " + s;
        return msg;
    }
    std::vector<std::string> issues_;
};

struct AreaConfig {
    std::size_t rows = 40;
    std::size_t cols = 64;
    double passive_cell_um2 = 0.36;
    double active_cell_um2 = 2360.0;
};

struct ExperimentConfig {
    Variant variant = Variant::crossbar_noisy;
    DeviceParams device{};
    TrainingConfig training{};
    std::size_t n_hidden = 15;
    double v_read = 0.1;
    std::filesystem::path data_path = "data/airline-passengers.csv";
    std::filesystem::path output_dir = "out";
    std::size_t replicas = 1;
    std::uint64_t seed = 42;
    std::vector<std::size_t> snapshot_epochs = {0, 10, 50, 100, 200};
    std::optional<bool> noise_d2d;  // honored for crossbar_noisy only
    std::optional<bool> noise_c2c;
    std::optional<bool> noise_read;
    AreaConfig area{};
    bool strict_data = false;

    // crossbar_ideal forces all flags off; crossbar_noisy turns everything on
    // unless a source is individually overridden.
    NoiseFlags resolved_flags() const {
        if (variant != Variant::crossbar_noisy)
            return kNoiseOff;
        return NoiseFlags{noise_d2d.value_or(true), noise_c2c.value_or(true),
                          noise_read.value_or(true)};
    }

    NetworkLayout resolved_layout() const {
        NetworkLayout layout = NetworkLayout::with_hidden(n_hidden);
        layout.v_read = v_read;
        layout.g2w_ratio = training.g2w_ratio;
        return layout;
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> issues;
        auto check = [&](bool ok, const std::string& msg) {
            if (!ok)
                issues.push_back(msg);
        };
        check(device.g_min > 0.0 && device.g_min < device.g_max,
              "device.g_min/g_max: require 0 < g_min < g_max");
        check(device.a_set > 0.0, "device.a_set: must be > 0");
        check(device.a_reset > 0.0, "device.a_reset: must be > 0");
        check(device.gamma >= 0.0, "device.gamma: must be >= 0");
        check(device.sigma_d2d >= 0.0, "device.sigma_d2d: must be >= 0");
        check(device.sigma_c2c >= 0.0, "device.sigma_c2c: must be >= 0");
        check(device.sigma_read >= 0.0, "device.sigma_read: must be >= 0");
        check(device.v_set > 0.0, "device.v_set: must be > 0");
        check(device.v_reset < 0.0, "device.v_reset: must be < 0");
        check(training.alpha > 0.0, "training.alpha: must be > 0");
        check(training.eta >= 0.0 && training.eta < 1.0, "training.eta: must be in [0, 1)");
        check(training.epochs >= 1, "training.epochs: must be >= 1");
        check(training.g2w_ratio > 0.0, "training.g2w_ratio: must be > 0");
        check(training.t_p > 0.0, "training.t_p: must be > 0");
        check(training.v_set > 0.0 && training.v_reset < 0.0,
              "training.v_set/v_reset: require v_set > 0 > v_reset");
        check(training.v_set == device.v_set && training.v_reset == device.v_reset,
              "training.v_set/v_reset: pulse amplitudes must equal the device calibration");
        check(n_hidden >= 1, "network.n_hidden: must be >= 1");
        check(v_read > 0.0 && v_read <= CrossbarArray::kReadVoltageLimit,
              "network.v_read: must be in (0, 0.2] V");
        check(replicas >= 1, "run.replicas: must be >= 1");
        check(!data_path.empty(), "run.data: must not be empty");
        check(!output_dir.empty(), "run.out: must not be empty");
        return issues;
    }
};

namespace detail {

inline bool parse_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "on" || s == "1") {
        out = true;
        return true;
    }
    if (s == "false" || s == "off" || s == "0") {
        out = false;
        return true;
    }
    return false;
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    try {
        std::size_t used = 0;
        out = std::stoull(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace detail

// Flat `key = value` text; '#' starts a comment, blank lines are skipped.
inline std::map<std::string, std::string> parse_flat_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> issues;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string trimmed = xbarlstm::detail::strip(line);
        if (trimmed.empty())
            continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string key = xbarlstm::detail::strip(trimmed.substr(0, eq));
        const std::string value = xbarlstm::detail::strip(trimmed.substr(eq + 1));
        if (key.empty()) {
            issues.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        kv[key] = value;
    }
    if (!issues.empty())
        throw ConfigError(std::move(issues));
    return kv;
}

inline std::map<std::string, std::string> parse_flat_config_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in)
        throw ConfigError({"cannot open config file " + p.string()});
    return parse_flat_config(in);
}

// Builds an ExperimentConfig from parsed keys. Unknown keys and type errors
// are collected so the caller sees every problem in one pass.
inline ExperimentConfig config_from_keys(const std::map<std::string, std::string>& kv) {
    ExperimentConfig cfg;
    std::vector<std::string> issues;

    auto set_double = [&](const std::string& value, const std::string& key, double& out) {
        if (!detail::parse_double(value, out))
            issues.push_back(key + ": not a number: '" + value + "'");
    };
    auto set_u64 = [&](const std::string& value, const std::string& key, std::uint64_t& out) {
        if (!detail::parse_u64(value, out))
            issues.push_back(key + ": not a non-negative integer: '" + value + "'");
    };
    auto set_size = [&](const std::string& value, const std::string& key, std::size_t& out) {
        std::uint64_t v = 0;
        if (detail::parse_u64(value, v))
            out = static_cast<std::size_t>(v);
        else
            issues.push_back(key + ": not a non-negative integer: '" + value + "'");
    };
    auto set_bool = [&](const std::string& value, const std::string& key, bool& out) {
        if (!detail::parse_bool(value, out))
            issues.push_back(key + ": not a boolean: '" + value + "'");
    };
    auto set_opt_bool = [&](const std::string& value, const std::string& key,
                            std::optional<bool>& out) {
        bool b = false;
        if (detail::parse_bool(value, b))
            out = b;
        else
            issues.push_back(key + ": not a boolean: '" + value + "'");
    };

    for (const auto& [key, value] : kv) {
        if (key == "run.variant") {
            if (value == "digital")
                cfg.variant = Variant::digital;
            else if (value == "crossbar_ideal")
                cfg.variant = Variant::crossbar_ideal;
            else if (value == "crossbar_noisy")
                cfg.variant = Variant::crossbar_noisy;
            else
                issues.push_back("run.variant: unknown variant '" + value + "'");
        } else if (key == "run.seed") {
            set_u64(value, key, cfg.seed);
        } else if (key == "run.replicas") {
            set_size(value, key, cfg.replicas);
        } else if (key == "run.data") {
            cfg.data_path = value;
        } else if (key == "run.out") {
            cfg.output_dir = value;
        } else if (key == "run.strict_data") {
            set_bool(value, key, cfg.strict_data);
        } else if (key == "run.snapshot_epochs") {
            cfg.snapshot_epochs.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = xbarlstm::detail::strip(tok);
                if (tok.empty())
                    continue;
                std::size_t e = 0;
                std::uint64_t v = 0;
                if (detail::parse_u64(tok, v)) {
                    e = static_cast<std::size_t>(v);
                    cfg.snapshot_epochs.push_back(e);
                } else {
                    issues.push_back("run.snapshot_epochs: bad entry '" + tok + "'");
                }
            }
        } else if (key == "device.g_min") {
            set_double(value, key, cfg.device.g_min);
        } else if (key == "device.g_max") {
            set_double(value, key, cfg.device.g_max);
        } else if (key == "device.a_set") {
            set_double(value, key, cfg.device.a_set);
        } else if (key == "device.a_reset") {
            set_double(value, key, cfg.device.a_reset);
        } else if (key == "device.gamma") {
            set_double(value, key, cfg.device.gamma);
        } else if (key == "device.sigma_d2d") {
            set_double(value, key, cfg.device.sigma_d2d);
        } else if (key == "device.sigma_c2c") {
            set_double(value, key, cfg.device.sigma_c2c);
        } else if (key == "device.sigma_read") {
            set_double(value, key, cfg.device.sigma_read);
        } else if (key == "device.v_set") {
            set_double(value, key, cfg.device.v_set);
        } else if (key == "device.v_reset") {
            set_double(value, key, cfg.device.v_reset);
        } else if (key == "training.alpha") {
            set_double(value, key, cfg.training.alpha);
        } else if (key == "training.eta") {
            set_double(value, key, cfg.training.eta);
        } else if (key == "training.g2w_ratio") {
            set_double(value, key, cfg.training.g2w_ratio);
        } else if (key == "training.v_set") {
            set_double(value, key, cfg.training.v_set);
        } else if (key == "training.v_reset") {
            set_double(value, key, cfg.training.v_reset);
        } else if (key == "training.t_p") {
            set_double(value, key, cfg.training.t_p);
        } else if (key == "training.epochs") {
            set_size(value, key, cfg.training.epochs);
        } else if (key == "training.granularity") {
            if (value == "per_epoch")
                cfg.training.granularity = UpdateGranularity::per_epoch;
            else if (value == "per_sample")
                cfg.training.granularity = UpdateGranularity::per_sample;
            else
                issues.push_back("training.granularity: expected per_epoch or per_sample");
        } else if (key == "network.n_hidden") {
            set_size(value, key, cfg.n_hidden);
        } else if (key == "network.v_read") {
            set_double(value, key, cfg.v_read);
        } else if (key == "noise.d2d") {
            set_opt_bool(value, key, cfg.noise_d2d);
        } else if (key == "noise.c2c") {
            set_opt_bool(value, key, cfg.noise_c2c);
        } else if (key == "noise.read") {
            set_opt_bool(value, key, cfg.noise_read);
        } else if (key == "report.area_rows") {
            set_size(value, key, cfg.area.rows);
        } else if (key == "report.area_cols") {
            set_size(value, key, cfg.area.cols);
        } else if (key == "report.passive_cell_um2") {
            set_double(value, key, cfg.area.passive_cell_um2);
        } else if (key == "report.active_cell_um2") {
            set_double(value, key, cfg.area.active_cell_um2);
        } else {
            issues.push_back("unknown key '" + key + "'");
        }
    }

    if (!issues.empty())
        throw ConfigError(std::move(issues));
    return cfg;
}

inline void throw_if_invalid(const ExperimentConfig& cfg) {
    auto issues = cfg.validate();
    if (!issues.empty())
        throw ConfigError(std::move(issues));
}

// Canonical flat-text echo; feeding this file back reproduces the run.
inline std::string to_flat_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "run.variant = " << to_string(cfg.variant) << '\n';
    out << "run.seed = " << cfg.seed << '\n';
    out << "run.replicas = " << cfg.replicas << '\n';
    out << "run.data = " << cfg.data_path.generic_string() << '\n';
    out << "run.out = " << cfg.output_dir.generic_string() << '\n';
    out << "run.strict_data = " << (cfg.strict_data ? "true" : "false") << '\n';
    out << "run.snapshot_epochs = ";
    for (std::size_t i = 0; i < cfg.snapshot_epochs.size(); ++i)
        out << (i ? "," : "") << cfg.snapshot_epochs[i];
    out << '\n';
    out << "device.g_min = " << format_g9(cfg.device.g_min) << '\n';
    out << "device.g_max = " << format_g9(cfg.device.g_max) << '\n';
    out << "device.a_set = " << format_g9(cfg.device.a_set) << '\n';
    out << "device.a_reset = " << format_g9(cfg.device.a_reset) << '\n';
    out << "device.gamma = " << format_g9(cfg.device.gamma) << '\n';
    out << "device.sigma_d2d = " << format_g9(cfg.device.sigma_d2d) << '\n';
    out << "device.sigma_c2c = " << format_g9(cfg.device.sigma_c2c) << '\n';
    out << "device.sigma_read = " << format_g9(cfg.device.sigma_read) << '\n';
    out << "device.v_set = " << format_g9(cfg.device.v_set) << '\n';
    out << "device.v_reset = " << format_g9(cfg.device.v_reset) << '\n';
    out << "training.alpha = " << format_g9(cfg.training.alpha) << '\n';
    out << "training.eta = " << format_g9(cfg.training.eta) << '\n';
    out << "training.g2w_ratio = " << format_g9(cfg.training.g2w_ratio) << '\n';
    out << "training.v_set = " << format_g9(cfg.training.v_set) << '\n';
    out << "training.v_reset = " << format_g9(cfg.training.v_reset) << '\n';
    out << "training.t_p = " << format_g9(cfg.training.t_p) << '\n';
    out << "training.epochs = " << cfg.training.epochs << '\n';
    out << "training.granularity = " << to_string(cfg.training.granularity) << '\n';
    out << "network.n_hidden = " << cfg.n_hidden << '\n';
    out << "network.v_read = " << format_g9(cfg.v_read) << '\n';
    if (cfg.noise_d2d)
        out << "noise.d2d = " << (*cfg.noise_d2d ? "true" : "false") << '\n';
    if (cfg.noise_c2c)
        out << "noise.c2c = " << (*cfg.noise_c2c ? "true" : "false") << '\n';
    if (cfg.noise_read)
        out << "noise.read = " << (*cfg.noise_read ? "true" : "false") << '\n';
    out << "report.area_rows = " << cfg.area.rows << '\n';
    out << "report.area_cols = " << cfg.area.cols << '\n';
    out << "report.passive_cell_um2 = " << format_g9(cfg.area.passive_cell_um2) << '\n';
    out << "report.active_cell_um2 = " << format_g9(cfg.area.active_cell_um2) << '\n';
    return out.str();
}

} // namespace xbarlstm
