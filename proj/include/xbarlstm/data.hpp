#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace xbarlstm {

// International airline passengers series: 144 monthly observations,
// first 96 train the network, the remaining 48 test it.
inline constexpr std::size_t kCanonicalSeriesLength = 144;
inline constexpr std::size_t kCanonicalSplitIndex = 96;

struct TimeSeriesDataset {
    std::vector<double> raw;        // passenger counts, file order
    std::vector<double> normalized; // min-max scaled to [0, 1]
    double norm_min = 0.0;
    double norm_max = 0.0;
    std::size_t split_index = kCanonicalSplitIndex;
};

struct LoadOptions {
    // Warn (or fail, when strict) if the series length differs.
    std::optional<std::size_t> expected_length = kCanonicalSeriesLength;
    bool strict = false;
};

struct LoadedSeries {
    std::vector<double> values;
    std::vector<std::string> warnings;
};

namespace detail {
inline std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
} // namespace detail

// Reads a CSV with a header row; the passenger count is the last field of
// each record. Malformed or non-positive values fail with the row number.
inline LoadedSeries load_series(const std::filesystem::path& path, const LoadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_series: cannot open " + path.string());

    LoadedSeries out;
    std::string line;
    std::size_t row = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++row;
        const std::string trimmed = detail::strip(line);
        if (trimmed.empty())
            continue;
        if (!header_skipped) {
            header_skipped = true; // first non-blank record is the header
            continue;
        }
        const auto comma = trimmed.find_last_of(',');
        const std::string field =
            detail::strip(comma == std::string::npos ? trimmed : trimmed.substr(comma + 1));
        double value = 0.0;
        std::size_t consumed = 0;
        try {
            value = std::stod(field, &consumed);
        } catch (const std::exception&) {
            throw std::runtime_error("load_series: malformed value '" + field + "' at row " +
                                     std::to_string(row) + " of " + path.string());
        }
        if (consumed != field.size())
            throw std::runtime_error("load_series: malformed value '" + field + "' at row " +
                                     std::to_string(row) + " of " + path.string());
        if (!(value > 0.0))
            throw std::runtime_error("load_series: non-positive count at row " +
                                     std::to_string(row) + " of " + path.string());
        out.values.push_back(value);
    }
    if (opts.expected_length && out.values.size() != *opts.expected_length) {
        const std::string msg = "load_series: expected " + std::to_string(*opts.expected_length) +
                                " observations, got " + std::to_string(out.values.size()) +
                                " in " + path.string();
        if (opts.strict)
            throw std::runtime_error(msg);
        out.warnings.push_back(msg);
    }
    return out;
}

struct NormalizedSeries {
    std::vector<double> values;
    double min;
    double max;
};

// Min-max scaling over the full series; train and test share one scale.
inline NormalizedSeries normalize(const std::vector<double>& raw) {
    if (raw.size() < 2)
        throw std::domain_error("normalize: need at least 2 observations");
    double lo = raw.front(), hi = raw.front();
    for (double v : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo == hi)
        throw std::domain_error("normalize: constant series cannot be scaled");
    NormalizedSeries out;
    out.min = lo;
    out.max = hi;
    out.values.reserve(raw.size());
    for (double v : raw)
        out.values.push_back((v - lo) / (hi - lo));
    return out;
}

inline TimeSeriesDataset make_dataset(std::vector<double> raw,
                                      std::size_t split_index = kCanonicalSplitIndex) {
    if (split_index + 1 >= raw.size())
        throw std::domain_error("make_dataset: split index leaves no test targets");
    auto norm = normalize(raw);
    TimeSeriesDataset ds;
    ds.raw = std::move(raw);
    ds.normalized = std::move(norm.values);
    ds.norm_min = norm.min;
    ds.norm_max = norm.max;
    ds.split_index = split_index;
    return ds;
}

inline double denormalize(double y, const TimeSeriesDataset& ds) {
    return y * (ds.norm_max - ds.norm_min) + ds.norm_min;
}

// One-step-ahead supervision: pair (x_t, y = x_{t+1}) over the normalized
// series. Train pairs stay inside the first split_index points; test pairs
// span the boundary so every held-out observation becomes a target.
struct SupervisedData {
    std::vector<double> train_inputs;
    std::vector<double> train_targets;
    std::vector<double> test_inputs;
    std::vector<double> test_targets;
};

inline SupervisedData make_supervised(const TimeSeriesDataset& ds) {
    const auto& x = ds.normalized;
    if (x.size() < 2 || ds.split_index < 2 || ds.split_index >= x.size())
        throw std::domain_error("make_supervised: invalid dataset split");
    SupervisedData out;
    for (std::size_t t = 0; t + 1 < ds.split_index; ++t) {
        out.train_inputs.push_back(x[t]);
        out.train_targets.push_back(x[t + 1]);
    }
    for (std::size_t t = ds.split_index - 1; t + 1 < x.size(); ++t) {
        out.test_inputs.push_back(x[t]);
        out.test_targets.push_back(x[t + 1]);
    }
    return out;
}

} // namespace xbarlstm
