#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbarlstm/crossbar.hpp"

namespace xbarlstm {

// Decimal, 9 significant digits, '.' radix, locale-independent. All CSV
// output funnels through here so identical runs diff byte-for-byte.
inline std::string format_g9(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary); // binary: no CRLF translation
    if (!out)
        throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

inline void write_loss_csv(const std::filesystem::path& path, std::span<const double> train_mse,
                           std::span<const double> test_mse) {
    if (train_mse.size() != test_mse.size())
        throw std::invalid_argument("write_loss_csv: curve length mismatch");
    auto out = open_output(path);
    out << "epoch,train_mse,test_mse\n";
    for (std::size_t e = 0; e < train_mse.size(); ++e)
        out << e << ',' << format_g9(train_mse[e]) << ',' << format_g9(test_mse[e]) << '\n';
}

inline void write_energy_csv(const std::filesystem::path& path,
                             std::span<const double> energy_per_epoch) {
    auto out = open_output(path);
    out << "epoch,energy_J,cumulative_J\n";
    double cumulative = 0.0;
    for (std::size_t e = 0; e < energy_per_epoch.size(); ++e) {
        cumulative += energy_per_epoch[e];
        out << (e + 1) << ',' << format_g9(energy_per_epoch[e]) << ',' << format_g9(cumulative)
            << '\n';
    }
}

struct PredictionRow {
    std::size_t index;      // index of the target observation
    double actual_count;    // passenger units
    double predicted_count; // passenger units
    bool is_test;
};

inline void write_predictions_csv(const std::filesystem::path& path,
                                  std::span<const PredictionRow> rows) {
    auto out = open_output(path);
    out << "index,actual_count,predicted_count,split\n";
    for (const auto& r : rows)
        out << r.index << ',' << format_g9(r.actual_count) << ',' << format_g9(r.predicted_count)
            << ',' << (r.is_test ? "test" : "train") << '\n';
}

// Conductance map, one CSV row per crossbar row, siemens, noise-free.
inline void write_conductance_csv(const std::filesystem::path& path, const CrossbarArray& xb) {
    auto out = open_output(path);
    for (std::size_t r = 0; r < xb.n_rows(); ++r) {
        for (std::size_t c = 0; c < xb.n_cols(); ++c) {
            if (c > 0)
                out << ',';
            out << format_g9(xb.cell(r, c).g);
        }
        out << '\n';
    }
}

} // namespace xbarlstm
