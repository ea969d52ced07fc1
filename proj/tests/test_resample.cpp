#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "vbpbb/resample.hpp"
#include "vbpbb/rng.hpp"
#include "vbpbb/simulate.hpp"

using namespace vbpbb;

namespace {

TimeSeries random_series(std::uint64_t seed, std::size_t n, double scale = 1.0) {
    Rng rng(seed);
    TimeSeries s{1, std::vector<double>(n)};
    for (auto& v : s.values) v = scale * (rng.unit() * 2.0 - 1.0);
    return s;
}

TimeSeries tile_block(const std::vector<double>& block, std::size_t copies) {
    TimeSeries s{1, {}};
    for (std::size_t c = 0; c < copies; ++c)
        s.values.insert(s.values.end(), block.begin(), block.end());
    return s;
}

}  // namespace

TEST_SUITE("resample") {

TEST_CASE("pbb_resample: exactly periodic input reproduces the source bit for bit") {
    const auto source = tile_block({0.31, -1.7, 2.25, 0.0, -0.125}, 8);
    const auto ens = pbb_resample(source, 5, 32, 999);
    REQUIRE(ens.replicates == 32);
    REQUIRE(ens.length == 40);
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto row = ens.row(b);
        for (std::size_t i = 0; i < row.size(); ++i) CHECK(row[i] == source.values[i]);
    }
}

TEST_CASE("pbb_resample: phase preservation, exhaustively on small instances") {
    const auto source = random_series(7, 24);
    const std::int64_t period = 4;
    const auto ens = pbb_resample(source, period, 64, 5);
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto row = ens.row(b);
        for (std::size_t i = 0; i < row.size(); ++i) {
            bool found = false;
            for (std::size_t j = i % static_cast<std::size_t>(period); j < source.length();
                 j += static_cast<std::size_t>(period))
                if (row[i] == source.values[j]) {
                    found = true;
                    break;
                }
            CHECK(found);
        }
    }
}

TEST_CASE("pbb_resample matches the exhaustive two-block enumeration oracle") {
    const TimeSeries source{1, {1.0, 2.0, 3.0, 4.0}};
    const std::size_t draws = 10000;
    const auto ens = pbb_resample(source, 2, draws, 31337);
    // Enumeration: two blocks, so each replicate is one of four equally
    // likely concatenations.
    const std::array<std::array<double, 4>, 4> outcomes = {{{1, 2, 1, 2},
                                                            {1, 2, 3, 4},
                                                            {3, 4, 1, 2},
                                                            {3, 4, 3, 4}}};
    std::array<std::size_t, 4> counts{};
    for (std::size_t b = 0; b < draws; ++b) {
        const auto row = ens.row(b);
        bool matched = false;
        for (std::size_t o = 0; o < outcomes.size(); ++o) {
            if (std::equal(row.begin(), row.end(), outcomes[o].begin())) {
                ++counts[o];
                matched = true;
                break;
            }
        }
        CHECK(matched);
    }
    const double se = std::sqrt(0.25 * 0.75 / static_cast<double>(draws));
    for (const auto count : counts)
        CHECK(std::abs(static_cast<double>(count) / static_cast<double>(draws) - 0.25) <= 4.0 * se);
}

TEST_CASE("pbb_resample: remainder handling keeps length and phases") {
    const auto source = random_series(21, 10);
    const auto ens = pbb_resample(source, 3, 40, 77);
    REQUIRE(ens.length == 10);
    REQUIRE(ens.warnings.size() == 1);
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto row = ens.row(b);
        // the tail position (offset 9, phase 9 mod 3 = 0) may only carry
        // values from offsets 0, 3, or 6
        bool ok = false;
        for (std::size_t j = 0; j <= 6; j += 3) ok = ok || row[9] == source.values[j];
        CHECK(ok);
    }
}

TEST_CASE("pbb_resample: determinism and thread invariance") {
    const auto source = random_series(4, 125);
    const auto a = pbb_resample(source, 25, 48, 2024, 1);
    const auto b = pbb_resample(source, 25, 48, 2024, 1);
    const auto c = pbb_resample(source, 25, 48, 2024, 3);
    CHECK(a.data == b.data);
    CHECK(a.data == c.data);
    const auto d = pbb_resample(source, 25, 48, 2025, 1);
    CHECK(a.data != d.data);
}

TEST_CASE("pbb_resample rejects invalid shapes") {
    const auto source = random_series(1, 10);
    CHECK_THROWS_AS((void)pbb_resample(source, 11, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)pbb_resample(source, 0, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)pbb_resample(source, 2, 0, 0), std::invalid_argument);
}

TEST_CASE("pointwise_mean basics and column oracle") {
    SUBCASE("a single replicate comes back unchanged") {
        const auto source = random_series(5, 12);
        const auto ens = pbb_resample(source, 3, 1, 9);
        const auto mean = pointwise_mean(ens);
        const auto row = ens.row(0);
        for (std::size_t i = 0; i < row.size(); ++i) CHECK(mean.values[i] == row[i]);
    }

    SUBCASE("identical rows collapse to that row exactly") {
        const auto source = tile_block({1.25, -0.5, 3.0}, 5);
        const auto ens = pbb_resample(source, 3, 40, 2);
        const auto mean = pointwise_mean(ens);
        for (std::size_t i = 0; i < mean.length(); ++i) CHECK(mean.values[i] == source.values[i]);
    }

    SUBCASE("random 5x8 ensemble matches the column-mean oracle") {
        BootstrapEnsemble ens;
        ens.replicates = 5;
        ens.length = 8;
        ens.block_length = 2;
        Rng rng(64);
        ens.data.resize(40);
        for (auto& v : ens.data) v = rng.unit() * 10.0 - 5.0;
        const auto mean = pointwise_mean(ens);
        for (std::size_t t = 0; t < 8; ++t) {
            std::vector<double> column;
            for (std::size_t b = 0; b < 5; ++b) column.push_back(ens.data[b * 8 + t]);
            CHECK(std::abs(mean.values[t] - static_cast<double>(oracles::mean_ld(column))) <= 1e-12);
        }
        // thread invariance of the reduction
        CHECK(pointwise_mean(ens, 4).values == mean.values);
    }
}

TEST_CASE("quantile_type7 hand values") {
    const std::vector<double> sorted = {1.0, 2.0, 3.0};
    CHECK(quantile_type7(sorted, 0.0) == 1.0);
    CHECK(quantile_type7(sorted, 0.5) == 2.0);
    CHECK(quantile_type7(sorted, 1.0) == 3.0);
    CHECK(quantile_type7(sorted, 0.025) == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(quantile_type7(sorted, 0.975) == doctest::Approx(2.95).epsilon(1e-12));
    CHECK_THROWS_AS((void)quantile_type7(sorted, 1.5), std::invalid_argument);
}

TEST_CASE("ci_band: degenerate and hand-computed cases") {
    SUBCASE("zero-variance ensemble collapses the band") {
        const auto source = tile_block({0.5, -2.0, 1.0, 0.25}, 6);
        const auto ens = pbb_resample(source, 4, 16, 3);
        for (const auto mode : {BandMode::periodic_mean, BandMode::pointwise_ensemble}) {
            const auto band = ci_band(ens, 0.95, mode);
            for (std::size_t i = 0; i < band.center.length(); ++i) {
                CHECK(band.lower.values[i] == band.center.values[i]);
                CHECK(band.upper.values[i] == band.center.values[i]);
            }
        }
    }

    SUBCASE("three constant rows give the documented type-7 quantiles") {
        BootstrapEnsemble ens;
        ens.replicates = 3;
        ens.length = 6;
        ens.block_length = 2;
        ens.data = {1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3};
        for (const auto mode : {BandMode::periodic_mean, BandMode::pointwise_ensemble}) {
            const auto band = ci_band(ens, 0.95, mode);
            for (std::size_t i = 0; i < band.center.length(); ++i) {
                CHECK(band.lower.values[i] == doctest::Approx(1.05).epsilon(1e-12));
                CHECK(band.center.values[i] == doctest::Approx(2.0).epsilon(1e-12));
                CHECK(band.upper.values[i] == doctest::Approx(2.95).epsilon(1e-12));
            }
        }
    }

    SUBCASE("parameter validation") {
        const auto source = random_series(6, 20);
        const auto ens = pbb_resample(source, 4, 1, 3);
        CHECK_THROWS_AS((void)ci_band(ens, 0.95), std::invalid_argument);
        const auto ens2 = pbb_resample(source, 4, 8, 3);
        CHECK_THROWS_AS((void)ci_band(ens2, 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)ci_band(ens2, 1.0), std::invalid_argument);
    }
}

TEST_CASE("ci_band: raising the level never narrows the band") {
    const auto source = random_series(13, 120, 2.0);
    const auto ens = pbb_resample(source, 6, 200, 17);
    for (const auto mode : {BandMode::periodic_mean, BandMode::pointwise_ensemble}) {
        const auto narrow = ci_band(ens, 0.80, mode);
        const auto wide = ci_band(ens, 0.99, mode);
        for (std::size_t i = 0; i < narrow.center.length(); ++i) {
            CHECK(wide.lower.values[i] <= narrow.lower.values[i]);
            CHECK(wide.upper.values[i] >= narrow.upper.values[i]);
        }
    }
}

TEST_CASE("ci_band: periodic-mean band is no wider than the pointwise band") {
    const auto source = random_series(14, 120, 2.0);
    const auto ens = pbb_resample(source, 6, 400, 18);
    const auto periodic = ci_band(ens, 0.95, BandMode::periodic_mean);
    const auto pointwise = ci_band(ens, 0.95, BandMode::pointwise_ensemble);
    for (std::size_t i = 0; i < periodic.center.length(); ++i) {
        const double w_periodic = periodic.upper.values[i] - periodic.lower.values[i];
        const double w_pointwise = pointwise.upper.values[i] - pointwise.lower.values[i];
        CHECK(w_periodic <= w_pointwise + 1e-12);
    }
    // periodic-mode curves are P-periodic tilings
    for (std::size_t i = 6; i < periodic.center.length(); ++i) {
        CHECK(periodic.lower.values[i] == periodic.lower.values[i - 6]);
        CHECK(periodic.center.values[i] == periodic.center.values[i - 6]);
        CHECK(periodic.upper.values[i] == periodic.upper.values[i - 6]);
    }
}

TEST_CASE("vbpbb_run: ensemble mean tracks the PC-sum mean") {
    ScenarioConfig cfg;
    cfg.length = 700;
    cfg.components = {{0.8, 25.0, 100.0}};
    cfg.noise = NoiseSpec{
        {NoiseTerm{0.5, Normal{0.0, 3.0}}, NoiseTerm{0.5, GammaShifted{2.0, 5.0, -10.0}}},
        NoiseCombine::coefficient_sum};
    cfg.seed = 11;
    const auto data = build_scenario(cfg);
    const std::vector<KzftParams> targets = {{1.0 / 25.0, 251, 1}};
    const auto result = vbpbb_run(data.observed, targets, 400, 99, 0.95);
    CHECK(result.ensemble.block_length == 25);
    CHECK(result.ensemble.replicates == 400);
    const double pc_mean = mean_of(result.pc_sum.values);
    const double grand = mean_of(result.pointwise.values);
    CHECK(std::abs(grand - pc_mean) <= 1e-2);
}

TEST_CASE("vbpbb_run: noiseless demodulation-exact input collapses the band") {
    // At f = 0.5 the demodulated series is constant, so truncated edge
    // windows introduce no distortion and every block is identical to
    // rounding; the interior band must be numerically zero-width.
    ScenarioConfig cfg;
    cfg.length = 200;
    cfg.components = {{0.8, 2.0, 0.7}};
    cfg.seed = 0;
    const auto data = build_scenario(cfg);
    const std::vector<KzftParams> targets = {{0.5, 21, 1}};
    const auto result = vbpbb_run(data.observed, targets, 300, 5, 0.95);
    CHECK(result.ensemble.block_length == 2);
    const auto margin = static_cast<std::size_t>(kzft_margin(targets[0]));
    double max_width = 0.0;
    for (std::size_t i = margin; i < result.band.center.length() - margin; ++i)
        max_width = std::max(max_width,
                             result.band.upper.values[i] - result.band.lower.values[i]);
    CHECK(max_width <= 1e-6);
}

TEST_CASE("vbpbb_run: target validation and multi-target block policy") {
    const auto s = random_series(3, 700, 1.0);
    CHECK_THROWS_AS((void)vbpbb_run(s, {}, 10, 1, 0.95), std::invalid_argument);

    const std::vector<KzftParams> two = {{1.0 / 25.0, 51, 1}, {1.0 / 7.0, 51, 1}};
    const auto result = vbpbb_run(s, two, 10, 1, 0.95);
    CHECK(result.ensemble.block_length == 175);  // lcm(25, 7)
    CHECK(result.components.size() == 2);

    const std::vector<KzftParams> wide = {{1.0 / 25.0, 51, 1}, {1.0 / 11.0, 51, 1}};
    CHECK_THROWS_AS((void)vbpbb_run(s, wide, 10, 1, 0.95), std::invalid_argument);
    VbpbbOptions with_override;
    with_override.block_length = 25;
    const auto overridden = vbpbb_run(s, wide, 10, 1, 0.95, with_override);
    CHECK(overridden.ensemble.block_length == 25);
}

TEST_CASE("resampling is unbiased toward the source phase means") {
    const auto source = random_series(42, 120, 3.0);
    const std::int64_t period = 6;
    const std::size_t replicates = 2000;
    const auto ens = pbb_resample(source, period, replicates, 424242);
    const auto exact = oracles::periodic_mean_groupby(source, period);
    const std::size_t blocks = source.length() / static_cast<std::size_t>(period);

    // per-phase spread of the source values
    std::vector<double> sigma(static_cast<std::size_t>(period), 0.0);
    for (std::size_t k = 0; k < sigma.size(); ++k) {
        long double ss = 0.0L;
        for (std::size_t j = k; j < source.length(); j += static_cast<std::size_t>(period)) {
            const long double d = source.values[j] - exact[k];
            ss += d * d;
        }
        sigma[k] = std::sqrt(static_cast<double>(ss) / static_cast<double>(blocks));
    }

    // the ensemble periodic mean averages N*B draws per phase
    std::vector<long double> phase_sum(static_cast<std::size_t>(period), 0.0L);
    std::vector<std::size_t> phase_count(static_cast<std::size_t>(period), 0);
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto row = ens.row(b);
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto k = static_cast<std::size_t>(i % static_cast<std::size_t>(period));
            phase_sum[k] += row[i];
            ++phase_count[k];
        }
    }
    for (std::size_t k = 0; k < phase_sum.size(); ++k) {
        const double curve_k = static_cast<double>(phase_sum[k] / phase_count[k]);
        const double se =
            sigma[k] / std::sqrt(static_cast<double>(blocks) * static_cast<double>(replicates));
        CHECK(std::abs(curve_k - exact[k]) <= 4.0 * se + 1e-12);
    }

    // pointwise means average B draws each
    const auto pw = pointwise_mean(ens);
    for (std::size_t t = 0; t < pw.length(); ++t) {
        const auto k = static_cast<std::size_t>(phase_of(pw.time_at(t), period) - 1);
        const double se = sigma[k] / std::sqrt(static_cast<double>(replicates));
        CHECK(std::abs(pw.values[t] - exact[k]) <= 4.0 * se + 1e-12);
    }
}

}  // TEST_SUITE
