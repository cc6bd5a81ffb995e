#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "rts/core_data.hpp"
#include "rts/errors.hpp"

using namespace rts;

namespace {

std::string write_temp_csv(const std::string& content) {
    static int counter = 0;
    std::string path = "test_core_data_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_csv parses rows in order") {
    const auto path = write_temp_csv("timestamp,price\n1,1.0\n2,2.0\n3,3.0\n");
    const auto series = load_csv(path, "price");
    CHECK(series.size() == 3);
    CHECK(series.values == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(series.timestamps == std::vector<std::int64_t>{1, 2, 3});
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects non-monotone timestamps") {
    const auto path = write_temp_csv("timestamp,price\n1,1.0\n1,2.0\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "price"), doctest::Contains("row 2"), CsvError);
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects non-finite values") {
    const auto path = write_temp_csv("timestamp,price\n1,1.0\nNaN row here,2\n");
    const auto path2 = write_temp_csv("timestamp,price\n1,1.0\n2,NaN\n");
    CHECK_THROWS_AS(load_csv(path, "price"), CsvError);
    CHECK_THROWS_WITH_AS(load_csv(path2, "price"), doctest::Contains("row 2"), CsvError);
    std::remove(path.c_str());
    std::remove(path2.c_str());
}

TEST_CASE("load_csv rejects a missing column") {
    const auto path = write_temp_csv("timestamp,price\n1,1.0\n");
    CHECK_THROWS_AS(load_csv(path, "close"), CsvError);
    std::remove(path.c_str());
}

TEST_CASE("generate_synthetic constant") {
    SynthSpec spec;
    spec.kind = SynthKind::Constant;
    spec.amplitude = 5.0;
    spec.length = 10;
    const auto series = generate_synthetic(spec);
    REQUIRE(series.size() == 10);
    for (double v : series.values) CHECK(v == 5.0);
}

TEST_CASE("noiseless sinusoid cycles through closed-form values") {
    SynthSpec spec;
    spec.kind = SynthKind::SinusoidTrendNoise;
    spec.amplitude = 1.0;
    spec.period = 4.0;
    spec.trend_slope = 0.0;
    spec.noise_std = 0.0;
    spec.length = 8;
    const auto series = generate_synthetic(spec);
    const std::vector<double> expected{0, 1, 0, -1, 0, 1, 0, -1};
    for (std::size_t t = 0; t < 8; ++t) CHECK(series.values[t] == doctest::Approx(expected[t]).epsilon(1e-12));
}

TEST_CASE("generate_synthetic is a pure function of its spec") {
    SynthSpec spec;
    spec.kind = SynthKind::Ar1Noise;
    spec.ar_coefficient = 0.7;
    spec.noise_std = 0.3;
    spec.length = 200;
    spec.seed = 99;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.values == b.values);
    CHECK(a.timestamps == b.timestamps);
}

TEST_CASE("fit_normalizer computes population statistics over train x") {
    std::vector<WindowSample> windows(1);
    windows[0].x = {1, 2, 3};
    windows[0].y = {0};
    const auto stats = fit_normalizer(windows);
    CHECK(stats.mean == doctest::Approx(2.0));
    CHECK(stats.std == doctest::Approx(std::sqrt(2.0 / 3.0)));

    windows[0].x = {0, 0, 4, 4};
    const auto stats2 = fit_normalizer(windows);
    CHECK(stats2.mean == doctest::Approx(2.0));
    CHECK(stats2.std == doctest::Approx(2.0));
}

TEST_CASE("fit_normalizer rejects a constant series") {
    std::vector<WindowSample> windows(2);
    windows[0].x = {3, 3};
    windows[1].x = {3, 3};
    CHECK_THROWS_AS(fit_normalizer(windows), DegenerateSeries);
}

TEST_CASE("normalize and denormalize are exact inverses") {
    NormalizerStats stats{2.0, 2.0};
    CHECK(normalize(2.0, stats) == 0.0);
    CHECK(normalize(4.0, stats) == 1.0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-100, 100);
    for (int i = 0; i < 200; ++i) {
        const double v = dist(rng);
        CHECK(denormalize(normalize(v, stats), stats) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("make_windows enumerates stride-1 samples") {
    PriceSeries series;
    series.values = {1, 2, 3, 4, 5};
    series.timestamps = {0, 1, 2, 3, 4};
    const auto windows = make_windows(series, 2, 2);
    REQUIRE(windows.size() == 2);
    CHECK(windows[0].x == std::vector<double>{1, 2});
    CHECK(windows[0].y == std::vector<double>{3, 4});
    CHECK(windows[0].origin_index == 1);
    CHECK(windows[1].x == std::vector<double>{2, 3});
    CHECK(windows[1].y == std::vector<double>{4, 5});

    series.values = {1, 2, 3, 4};
    series.timestamps = {0, 1, 2, 3};
    CHECK(make_windows(series, 2, 2).size() == 1);

    series.values = {1, 2, 3};
    series.timestamps = {0, 1, 2};
    CHECK_THROWS_AS(make_windows(series, 2, 2), SeriesTooShort);
}

TEST_CASE("split_chronological partitions in order") {
    std::vector<WindowSample> windows(10);
    for (std::size_t i = 0; i < windows.size(); ++i) windows[i].origin_index = i;
    const auto splits = split_chronological(windows, 0.7, 0.1, 0.2);
    CHECK(splits.train.size() == 7);
    CHECK(splits.calibration.size() == 1);
    CHECK(splits.test.size() == 2);

    std::vector<WindowSample> three(3);
    CHECK_THROWS_AS(split_chronological(three, 0.7, 0.1, 0.2), EmptySplit);

    std::vector<WindowSample> hundred(100);
    for (std::size_t i = 0; i < hundred.size(); ++i) hundred[i].origin_index = i;
    const auto s2 = split_chronological(hundred, 0.5, 0.25, 0.25);
    CHECK(s2.train.size() == 50);
    CHECK(s2.calibration.size() == 25);
    CHECK(s2.test.size() == 25);
    CHECK(s2.train.back().origin_index < s2.calibration.front().origin_index);
    CHECK(s2.calibration.back().origin_index < s2.test.front().origin_index);
}

TEST_CASE("split target ranges stay disjoint and ordered for random sizes") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 10 + rng() % 300;
        std::vector<WindowSample> windows(n);
        for (std::size_t i = 0; i < n; ++i) windows[i].origin_index = i;
        const auto splits = split_chronological(windows, 0.6, 0.2, 0.2);
        CHECK(splits.train.size() + splits.calibration.size() + splits.test.size() == n);
        CHECK(splits.train.back().origin_index < splits.calibration.front().origin_index);
        CHECK(splits.calibration.back().origin_index < splits.test.front().origin_index);
    }
}

TEST_CASE("save_csv / load_csv roundtrip") {
    SynthSpec spec;
    spec.kind = SynthKind::SinusoidTrendNoise;
    spec.length = 50;
    spec.noise_std = 0.2;
    spec.seed = 5;
    auto series = generate_synthetic(spec);
    save_csv(series, "roundtrip_test.csv");
    const auto loaded = load_csv("roundtrip_test.csv", "price");
    REQUIRE(loaded.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        CHECK(loaded.values[i] == doctest::Approx(series.values[i]).epsilon(1e-15));
    std::remove("roundtrip_test.csv");
}
