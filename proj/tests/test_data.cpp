#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "xbarlstm/data.hpp"
#include "xbarlstm/metrics.hpp"
#include "xbarlstm/rng.hpp"

using namespace xbarlstm;

namespace {

const std::filesystem::path kCanonical =
    std::filesystem::path(XBARLSTM_SOURCE_DIR) / "data" / "airline-passengers.csv";

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

} // namespace

TEST_CASE("canonical series loads with 144 observations") {
    const LoadedSeries s = load_series(kCanonical);
    REQUIRE(s.values.size() == 144);
    REQUIRE(s.warnings.empty());
    REQUIRE(s.values.front() == 112.0); // 1949-01
    REQUIRE(s.values.back() == 432.0);  // 1960-12
}

TEST_CASE("short series warns but still loads") {
    std::string body = "month,passengers\n";
    for (int i = 0; i < 143; ++i)
        body += "m," + std::to_string(100 + i) + "\n";
    const auto path = write_temp("xbarlstm_short.csv", body);
    const LoadedSeries s = load_series(path);
    REQUIRE(s.values.size() == 143);
    REQUIRE(s.warnings.size() == 1);

    LoadOptions strict;
    strict.strict = true;
    REQUIRE_THROWS_AS(load_series(path, strict), std::runtime_error);
}

TEST_CASE("ingestion errors carry the row number") {
    const auto bad = write_temp("xbarlstm_bad.csv", "month,passengers\n1949-01,112\n1949-02,abc\n");
    try {
        load_series(bad);
        FAIL("expected ingestion error");
    } catch (const std::runtime_error& e) {
        REQUIRE(std::string(e.what()).find("row 3") != std::string::npos);
    }

    const auto neg = write_temp("xbarlstm_neg.csv", "month,passengers\n1949-01,-5\n");
    REQUIRE_THROWS_AS(load_series(neg), std::runtime_error);
    REQUIRE_THROWS_AS(load_series("/nonexistent/file.csv"), std::runtime_error);
}

TEST_CASE("min-max normalization and its inverse") {
    const auto n = normalize({100.0, 200.0, 300.0});
    REQUIRE(n.values == std::vector<double>{0.0, 0.5, 1.0});
    REQUIRE(n.min == 100.0);
    REQUIRE(n.max == 300.0);

    REQUIRE_THROWS_AS(normalize({5.0, 5.0, 5.0}), std::domain_error);
    REQUIRE_THROWS_AS(normalize({5.0}), std::domain_error);

    // Already-[0,1] data with min 0 and max 1 is a fixed point.
    const auto idem = normalize({0.0, 0.25, 1.0});
    REQUIRE(idem.values == std::vector<double>{0.0, 0.25, 1.0});

    TimeSeriesDataset ds = make_dataset({120.0, 180.0, 240.0, 200.0, 130.0}, 3);
    for (std::size_t i = 0; i < ds.raw.size(); ++i)
        REQUIRE(denormalize(ds.normalized[i], ds) == Catch::Approx(ds.raw[i]).epsilon(1e-12));
    REQUIRE(denormalize(0.0, ds) == ds.norm_min);
    REQUIRE(denormalize(1.0, ds) == ds.norm_max);

    TimeSeriesDataset half;
    half.norm_min = 100.0;
    half.norm_max = 300.0;
    REQUIRE(denormalize(0.5, half) == 200.0);
}

TEST_CASE("supervised split: 95 train pairs, 48 test targets, no leakage") {
    const LoadedSeries s = load_series(kCanonical);
    const TimeSeriesDataset ds = make_dataset(s.values);
    const SupervisedData sup = make_supervised(ds);

    REQUIRE(sup.train_inputs.size() == 95);
    REQUIRE(sup.test_inputs.size() == 48);
    REQUIRE(sup.train_inputs.size() + sup.test_inputs.size() == 143);

    // Last train pair targets observation 95 (0-indexed).
    REQUIRE(sup.train_targets.back() == ds.normalized[95]);
    // Test pairs span the boundary: first test input is observation 95.
    REQUIRE(sup.test_inputs.front() == ds.normalized[95]);
    REQUIRE(sup.test_targets.front() == ds.normalized[96]);
    REQUIRE(sup.test_targets.back() == ds.normalized[143]);

    // y's index is always x's index + 1.
    for (std::size_t t = 0; t < sup.train_inputs.size(); ++t) {
        REQUIRE(sup.train_inputs[t] == ds.normalized[t]);
        REQUIRE(sup.train_targets[t] == ds.normalized[t + 1]);
    }
}

TEST_CASE("loading is deterministic") {
    const LoadedSeries a = load_series(kCanonical);
    const LoadedSeries b = load_series(kCanonical);
    REQUIRE(a.values == b.values);
}

TEST_CASE("mse and rmse match brute-force re-summation") {
    REQUIRE(mse_loss(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
    REQUIRE(mse_loss(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 0.0}) == 0.5);
    REQUIRE_THROWS_AS(mse_loss(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                      std::invalid_argument);

    REQUIRE(rmse(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
    REQUIRE(rmse(std::vector<double>{4.0, 5.0, 6.0}, std::vector<double>{1.0, 2.0, 3.0}) ==
            Catch::Approx(3.0).epsilon(1e-12));

    Rng rng(10);
    std::vector<double> p(33), a(33);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = rng.uniform(-2.0, 2.0);
        a[i] = rng.uniform(-2.0, 2.0);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        acc += (p[i] - a[i]) * (p[i] - a[i]);
    REQUIRE(mse_loss(p, a) == Catch::Approx(acc / 33.0).epsilon(1e-14));
    REQUIRE(rmse(p, a) == Catch::Approx(std::sqrt(acc / 33.0)).epsilon(1e-14));
}
