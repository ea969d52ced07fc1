#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "vbpbb/bias.hpp"
#include "vbpbb/rng.hpp"

using namespace vbpbb;

namespace {

TimeSeries random_series(std::uint64_t seed, std::size_t n, double scale = 1.0) {
    Rng rng(seed);
    TimeSeries s{1, std::vector<double>(n)};
    for (auto& v : s.values) v = scale * (rng.unit() * 2.0 - 1.0);
    return s;
}

ScenarioConfig noiseless_config() {
    ScenarioConfig cfg;
    cfg.length = 2500;
    cfg.components = {{0.8, 25.0, 100.0}};
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_SUITE("bias") {

TEST_CASE("overall_mean: full sine cycles, constants, oracle agreement") {
    const auto sine = generate_signal({{SineComponent{0.8, 25.0, 100.0}}}, 2500);
    CHECK(std::abs(overall_mean(sine)) <= 1e-12);

    const TimeSeries constant{1, std::vector<double>(37, -4.75)};
    CHECK(overall_mean(constant) == -4.75);

    const auto data = build_scenario(scenario_preset("original", 321));
    const double oracle = static_cast<double>(oracles::mean_ld(data.observed.values));
    CHECK(std::abs(overall_mean(data.observed) - oracle) <= 1e-12);
}

TEST_CASE("periodic_mean: periodic series, group sizes, group-by oracle") {
    SUBCASE("an exactly periodic series returns one cycle verbatim") {
        const std::vector<double> cycle = {0.5, -1.25, 2.0, 0.0, 3.5};
        TimeSeries s{1, {}};
        for (int c = 0; c < 12; ++c) s.values.insert(s.values.end(), cycle.begin(), cycle.end());
        const auto pm = periodic_mean(s, 5);
        REQUIRE(pm.size() == 5);
        for (std::size_t k = 0; k < 5; ++k) CHECK(pm[k] == cycle[k]);
    }

    SUBCASE("study dimensions give 100 members per phase") {
        const auto counts = phase_counts(1, 2500, 25);
        REQUIRE(counts.size() == 25);
        for (const auto c : counts) CHECK(c == 100);
    }

    SUBCASE("uneven groups match the brute-force group-by oracle") {
        const auto s = random_series(1234, 103, 2.0);
        const auto pm = periodic_mean(s, 10);
        const auto oracle = oracles::periodic_mean_groupby(s, 10);
        const auto counts = phase_counts(1, 103, 10);
        REQUIRE(pm.size() == 10);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(std::abs(pm[k] - oracle[k]) <= 1e-12);
            CHECK(counts[k] == (k < 3 ? 11u : 10u));
        }
    }
}

TEST_CASE("ensemble_means: degenerate ensembles and the grand-mean identity") {
    SUBCASE("identical rows collapse to per-row statistics") {
        std::vector<double> cycle = {1.5, -0.25, 0.75};
        TimeSeries source{1, {}};
        for (int c = 0; c < 5; ++c) source.values.insert(source.values.end(), cycle.begin(), cycle.end());
        const auto ens = pbb_resample(source, 3, 20, 8);
        const auto means = ensemble_means(ens);
        CHECK(means.overall == overall_mean(source));
        CHECK(means.pointwise.values == source.values);
        CHECK(means.periodic == periodic_mean(source, 3));
    }

    SUBCASE("hand-checked 2x4 ensemble") {
        BootstrapEnsemble ens;
        ens.replicates = 2;
        ens.length = 4;
        ens.block_length = 2;
        ens.data = {1, 1, 1, 1, 3, 3, 3, 3};
        const auto means = ensemble_means(ens);
        CHECK(means.overall == doctest::Approx(2.0).epsilon(1e-15));
        for (double v : means.pointwise.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));
        REQUIRE(means.periodic.size() == 2);
        CHECK(means.periodic[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(means.periodic[1] == doctest::Approx(2.0).epsilon(1e-15));
    }

    SUBCASE("grand mean equals an independent full reduction") {
        const auto source = random_series(55, 200, 2.5);
        const auto ens = pbb_resample(source, 8, 100, 3);
        const auto means = ensemble_means(ens);
        long double grand = 0.0L;
        for (double v : ens.data) grand += v;  // row-major order, opposite of the implementation
        grand /= static_cast<long double>(ens.data.size());
        CHECK(std::abs(means.overall - static_cast<double>(grand)) <= 1e-12);
    }
}

TEST_CASE("bias() is elementwise subtraction in all three shapes") {
    CHECK(bias(2.0, 2.0) == 0.0);
    // Study magnitudes: the overall rows reduce to plain differences.
    CHECK(bias(-0.000505, 0.0) == doctest::Approx(-0.000505).epsilon(1e-12));
    CHECK(bias(-0.001340, -0.001288) == doctest::Approx(-0.000052).epsilon(1e-9));

    const auto a = random_series(9, 30);
    CHECK(bias(a, a).values == std::vector<double>(30, 0.0));

    const std::vector<double> est = {1.0, 2.0};
    const std::vector<double> ref = {0.25, -0.25};
    CHECK(bias(est, ref) == std::vector<double>{0.75, 2.25});
    const std::vector<double> bad = {1.0};
    CHECK_THROWS_AS((void)bias(std::span<const double>(est), std::span<const double>(bad)),
                    std::invalid_argument);
    const auto b = random_series(10, 29);
    CHECK_THROWS_AS((void)bias(a, b), std::invalid_argument);
}

TEST_CASE("correct(): global, pointwise, periodic") {
    const TimeSeries flat{1, {1.0, 1.0, 1.0, 1.0}};

    SUBCASE("global zero bias is the identity") {
        CHECK(correct(flat, 0.0).values == flat.values);
    }

    SUBCASE("periodic tiling arithmetic") {
        const std::vector<double> pbias = {0.1, -0.1};
        const auto corrected = correct(flat, std::span<const double>(pbias));
        CHECK(corrected.values[0] == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(corrected.values[1] == doctest::Approx(1.1).epsilon(1e-15));
        CHECK(corrected.values[2] == doctest::Approx(0.9).epsilon(1e-15));
        CHECK(corrected.values[3] == doctest::Approx(1.1).epsilon(1e-15));
    }

    SUBCASE("pointwise correction against a full-length series") {
        const auto series = random_series(77, 40, 2.0);
        const auto pw_bias = random_series(78, 40, 0.5);
        const auto corrected = correct(series, pw_bias);
        for (std::size_t i = 0; i < 40; ++i)
            CHECK(corrected.values[i] == series.values[i] - pw_bias.values[i]);
        const auto wrong_shape = random_series(79, 39, 0.5);
        CHECK_THROWS_AS((void)correct(series, wrong_shape), std::invalid_argument);
    }

    SUBCASE("band correction shifts all three curves and keeps the width") {
        const auto source = random_series(80, 60, 2.0);
        const auto ens = pbb_resample(source, 6, 50, 4);
        const auto band = ci_band(ens, 0.9);
        const auto shifted = correct(band, 0.25);
        for (std::size_t i = 0; i < band.center.length(); ++i) {
            CHECK(shifted.center.values[i] ==
                  doctest::Approx(band.center.values[i] - 0.25).epsilon(1e-15));
            CHECK(shifted.upper.values[i] - shifted.lower.values[i] ==
                  doctest::Approx(band.upper.values[i] - band.lower.values[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("correction is self-inverse and linear on a seeded run") {
    const auto data = build_scenario(scenario_preset("original", 2718));
    const std::vector<KzftParams> targets = {{1.0 / 25.0, 251, 1}};
    const auto result = vbpbb_run(data.observed, targets, 200, 42, 0.95);
    const auto report = make_bias_report(data, result, "original");

    SUBCASE("global: correcting by the estimated overall bias zeroes it") {
        const auto corrected = correct(result.pointwise, report.overall.estimated_bias);
        const double recomputed = bias(overall_mean(corrected), report.overall.sample_mean);
        CHECK(std::abs(recomputed) <= 1e-10);

        const auto twice = correct(corrected, report.overall.estimated_bias);
        const double doubled = bias(overall_mean(twice), report.overall.sample_mean);
        CHECK(std::abs(doubled + report.overall.estimated_bias) <= 1e-10);
    }

    SUBCASE("pointwise: recomputed bias vanishes everywhere") {
        const auto corrected = correct(result.pointwise, report.pointwise_sample);
        const auto recomputed = bias(corrected, result.pc_sum);
        for (double v : recomputed.values) CHECK(std::abs(v) <= 1e-10);
    }

    SUBCASE("periodic: recomputed per-phase bias vanishes") {
        const auto corrected =
            correct(result.pointwise, std::span<const double>(report.periodic_sample));
        const auto recomputed = bias(periodic_mean(corrected, report.period),
                                     periodic_mean(result.pc_sum, report.period));
        for (double v : recomputed) CHECK(std::abs(v) <= 1e-10);
    }
}

TEST_CASE("bias_report: noiseless extraction keeps every bias small") {
    const auto data = build_scenario(noiseless_config());
    const std::vector<KzftParams> targets = {{1.0 / 25.0, 251, 1}};
    const auto result = vbpbb_run(data.observed, targets, 200, 7, 0.95);
    const auto report = make_bias_report(data, result, "noiseless");
    CHECK(std::abs(report.overall.true_bias) <= 1e-2);
    CHECK(std::abs(report.overall.estimated_bias) <= 1e-2);
    for (double v : report.pointwise_true.values) CHECK(std::abs(v) <= 1e-2);
    for (double v : report.pointwise_sample.values) CHECK(std::abs(v) <= 1e-2);
    for (double v : report.periodic_true) CHECK(std::abs(v) <= 1e-2);
    for (double v : report.periodic_sample) CHECK(std::abs(v) <= 1e-2);
}

TEST_CASE("bias_report: identical references make both bias variants coincide") {
    ScenarioConfig cfg;
    cfg.length = 60;
    cfg.components = {{1.0, 6.0, 0.25}};
    cfg.seed = 5;
    auto data = build_scenario(cfg);

    VbpbbResult result;
    result.pc_sum = data.baseline;  // sample reference equals the true reference
    result.ensemble = pbb_resample(result.pc_sum, 6, 50, 12);
    result.pointwise = pointwise_mean(result.ensemble);
    result.band = ci_band(result.ensemble, 0.95);
    const auto report = make_bias_report(data, result, "identical");
    CHECK(report.overall.true_bias == report.overall.estimated_bias);
    CHECK(report.pointwise_true.values == report.pointwise_sample.values);
    CHECK(report.periodic_true == report.periodic_sample);
}

TEST_CASE("bias_report: aggregation consistency and reference decomposition") {
    const auto data = build_scenario(scenario_preset("event", 606));
    const std::vector<KzftParams> targets = {{1.0 / 25.0, 251, 1}};
    const auto result = vbpbb_run(data.observed, targets, 300, 17, 0.95);
    const auto report = make_bias_report(data, result, "event");

    // mean over t of the pointwise bias reproduces the overall bias
    CHECK(std::abs(mean_of(report.pointwise_true.values) - report.overall.true_bias) <= 1e-10);
    CHECK(std::abs(mean_of(report.pointwise_sample.values) - report.overall.estimated_bias) <= 1e-10);

    // P | T: mean over phases of the periodic bias reproduces the overall bias
    CHECK(std::abs(mean_of(report.periodic_true) - report.overall.true_bias) <= 1e-10);
    CHECK(std::abs(mean_of(report.periodic_sample) - report.overall.estimated_bias) <= 1e-10);

    // periodic bias at k is the mean of the pointwise biases over phase k
    for (std::size_t k = 0; k < report.periodic_true.size(); ++k) {
        MeanAccumulator acc;
        for (std::size_t i = 0; i < report.pointwise_true.length(); ++i)
            if (phase_of(report.pointwise_true.time_at(i), report.period) ==
                static_cast<std::int64_t>(k + 1))
                acc.add(report.pointwise_true.values[i]);
        CHECK(std::abs(acc.mean() - report.periodic_true[k]) <= 1e-10);
    }

    // true_bias - estimated_bias == sample_mean - true_mean
    CHECK(std::abs((report.overall.true_bias - report.overall.estimated_bias) -
                   (report.overall.sample_mean - report.overall.true_mean)) <= 1e-12);

    // report metadata records the normalization rule
    CHECK(report.periodic_normalization == "N_k*B");
    CHECK(report.period == 25);
    CHECK(report.replicates == 300);
}

}  // TEST_SUITE
