#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpbb/parallel.hpp"
#include "vbpbb/rng.hpp"
#include "vbpbb/spectral.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

/// B x T matrix of period-aligned block-bootstrap resamples, row-major.
/// Every cell (b, t) holds a source value from a time index with the same
/// phase (t mod block_length) as t.
struct BootstrapEnsemble {
    std::size_t replicates = 0;  ///< B
    std::size_t length = 0;      ///< T
    std::int64_t block_length = 1;
    std::uint64_t seed = 0;
    std::int64_t start_index = 1;
    std::string source;
    std::vector<std::string> warnings;
    std::vector<double> data;

    std::span<const double> row(std::size_t b) const {
        return std::span<const double>(data).subspan(b * length, length);
    }
};

/// Periodic block bootstrap: the series is cut into N = floor(T/P)
/// consecutive non-overlapping blocks of length P starting at the first
/// sample; each replicate concatenates N block indices drawn i.i.d. uniform
/// with replacement. If P does not divide T, the trailing T mod P points are
/// dropped from the pool and each replicate's tail is the head of one extra
/// drawn block (a warning is attached). Row b consumes the child stream
/// (replicate, b) of `seed`, so any subset of rows may be generated
/// concurrently with results identical to sequential execution.
inline BootstrapEnsemble pbb_resample(const TimeSeries& series, std::int64_t block_length,
                                      std::size_t replicates, std::uint64_t seed,
                                      unsigned threads = 1) {
    validate(series, "pbb_resample");
    if (block_length < 1) throw std::invalid_argument("pbb_resample: block length must be >= 1");
    const auto n = static_cast<std::int64_t>(series.length());
    if (n < block_length)
        throw std::invalid_argument("pbb_resample: series shorter than one block (parameter P)");
    if (replicates < 1) throw std::invalid_argument("pbb_resample: need at least one replicate");

    const std::int64_t blocks = n / block_length;
    const std::int64_t remainder = n % block_length;

    BootstrapEnsemble ens;
    ens.replicates = replicates;
    ens.length = series.length();
    ens.block_length = block_length;
    ens.seed = seed;
    ens.start_index = series.start_index;
    if (remainder != 0)
        ens.warnings.push_back("block length does not divide series length; trailing " +
                               std::to_string(remainder) +
                               " points were dropped from the block pool and each replicate tail "
                               "is filled from one extra drawn block");
    ens.data.resize(replicates * series.length());

    const Rng master(seed);
    const double* src = series.values.data();
    parallel_for(replicates, threads, [&](std::size_t b) {
        Rng rng = master.child(StreamDomain::replicate, b);
        double* out = ens.data.data() + b * ens.length;
        for (std::int64_t i = 0; i < blocks; ++i) {
            const auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(blocks)));
            std::copy_n(src + pick * block_length, block_length, out + i * block_length);
        }
        if (remainder != 0) {
            const auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(blocks)));
            std::copy_n(src + pick * block_length, remainder, out + blocks * block_length);
        }
    });
    return ens;
}

/// Per-time mean across replicates: (1/B) sum_b y_t^{*(b)}. Columns are
/// reduced serially in replicate order (compensated), so the result does not
/// depend on the thread count.
inline TimeSeries pointwise_mean(const BootstrapEnsemble& ens, unsigned threads = 1) {
    if (ens.replicates == 0 || ens.length == 0)
        throw std::invalid_argument("pointwise_mean: empty ensemble");
    TimeSeries out{ens.start_index, std::vector<double>(ens.length, 0.0)};
    parallel_for(ens.length, threads, [&](std::size_t t) {
        MeanAccumulator acc;
        for (std::size_t b = 0; b < ens.replicates; ++b) acc.add(ens.data[b * ens.length + t]);
        out.values[t] = acc.mean();
    });
    return out;
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" rule): h = (n-1)q, result = x_(floor h) + frac(h) * (x_(floor h + 1) - x_(floor h)).
inline double quantile_type7(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile_type7: q must lie in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

enum class BandMode {
    /// Quantiles of the per-replicate periodic-mean curves, tiled to length T.
    /// Much tighter than the default: each curve averages N blocks, so the
    /// band tracks the resampling error of the phase means, not the per-cycle
    /// spread.
    periodic_mean,
    /// Quantiles of the raw replicate values at each time point (default).
    pointwise_ensemble,
};

struct BandEstimate {
    TimeSeries lower;
    TimeSeries center;  ///< pointwise mean (tiled periodic mean in periodic mode)
    TimeSeries upper;
    double level = 0.95;
    BandMode mode = BandMode::pointwise_ensemble;
};

namespace detail {

/// Length-P periodic mean curve of one row; phase anchored at absolute time.
inline std::vector<double> periodic_curve(std::span<const double> row, std::int64_t start_index,
                                          std::int64_t period) {
    std::vector<MeanAccumulator> acc(static_cast<std::size_t>(period));
    for (std::size_t i = 0; i < row.size(); ++i) {
        const std::int64_t t = start_index + static_cast<std::int64_t>(i);
        acc[static_cast<std::size_t>(phase_of(t, period) - 1)].add(row[i]);
    }
    std::vector<double> curve(static_cast<std::size_t>(period));
    for (std::size_t k = 0; k < curve.size(); ++k) curve[k] = acc[k].mean();
    return curve;
}

}  // namespace detail

/// Confidence band at `level`, empirical type-7 quantiles at (1-level)/2 and
/// (1+level)/2 across the B replicates. The default pointwise_ensemble mode
/// takes the quantiles over the raw replicate values at each t and centers on
/// the pointwise mean; periodic_mean mode takes them over the per-replicate
/// length-P periodic mean curves instead, tiling the curve quantiles to
/// length T with the curve mean as the center. Bounds are widened to the
/// center where empirical quantiles would cross it, so lower <= center <=
/// upper always holds.
inline BandEstimate ci_band(const BootstrapEnsemble& ens, double level,
                            BandMode mode = BandMode::pointwise_ensemble, unsigned threads = 1) {
    if (!(level > 0.0) || !(level < 1.0))
        throw std::invalid_argument("ci_band: level must lie in (0, 1)");
    if (ens.replicates < 2)
        throw std::invalid_argument("ci_band: need at least two replicates");

    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = (1.0 + level) / 2.0;

    BandEstimate band;
    band.level = level;
    band.mode = mode;
    band.lower = TimeSeries{ens.start_index, std::vector<double>(ens.length, 0.0)};
    band.center = band.lower;
    band.upper = band.lower;

    if (mode == BandMode::periodic_mean) {
        const auto period = static_cast<std::size_t>(ens.block_length);
        std::vector<double> curves(ens.replicates * period);
        parallel_for(ens.replicates, threads, [&](std::size_t b) {
            const auto curve = detail::periodic_curve(ens.row(b), ens.start_index, ens.block_length);
            std::copy(curve.begin(), curve.end(), curves.begin() + b * period);
        });
        std::vector<double> lo(period), hi(period), mid(period);
        std::vector<double> column(ens.replicates);
        for (std::size_t k = 0; k < period; ++k) {
            MeanAccumulator acc;
            for (std::size_t b = 0; b < ens.replicates; ++b) {
                column[b] = curves[b * period + k];
                acc.add(column[b]);
            }
            std::sort(column.begin(), column.end());
            mid[k] = acc.mean();
            lo[k] = std::min(quantile_type7(column, q_lo), mid[k]);
            hi[k] = std::max(quantile_type7(column, q_hi), mid[k]);
        }
        for (std::size_t i = 0; i < ens.length; ++i) {
            const std::int64_t t = ens.start_index + static_cast<std::int64_t>(i);
            const auto k = static_cast<std::size_t>(phase_of(t, ens.block_length) - 1);
            band.lower.values[i] = lo[k];
            band.center.values[i] = mid[k];
            band.upper.values[i] = hi[k];
        }
    } else {
        parallel_for(ens.length, threads, [&](std::size_t t) {
            std::vector<double> column(ens.replicates);
            MeanAccumulator acc;
            for (std::size_t b = 0; b < ens.replicates; ++b) {
                column[b] = ens.data[b * ens.length + t];
                acc.add(column[b]);
            }
            std::sort(column.begin(), column.end());
            const double mid = acc.mean();
            band.center.values[t] = mid;
            band.lower.values[t] = std::min(quantile_type7(column, q_lo), mid);
            band.upper.values[t] = std::max(quantile_type7(column, q_hi), mid);
        });
    }
    return band;
}

struct VbpbbOptions {
    BandMode band_mode = BandMode::pointwise_ensemble;
    std::optional<std::int64_t> block_length;  ///< overrides the period-derived default
    unsigned threads = 1;
};

struct VbpbbResult {
    std::vector<PcComponent> components;
    TimeSeries pc_sum;
    BootstrapEnsemble ensemble;
    TimeSeries pointwise;
    BandEstimate band;
};

namespace detail {

inline std::int64_t default_block_length(std::span<const KzftParams> targets, std::int64_t n) {
    std::int64_t block = 0;
    for (const auto& p : targets) {
        const auto period = static_cast<std::int64_t>(std::llround(1.0 / p.frequency));
        block = block == 0 ? period : std::lcm(block, period);
    }
    if (targets.size() > 1 && block > n / 3)
        throw std::invalid_argument(
            "vbpbb_run: target periods are inconsistent (LCM block exceeds T/3); "
            "set an explicit block length");
    return block;
}

}  // namespace detail

/// Full pipeline: extract each target component with the KZFT, sum them,
/// block-bootstrap the sum with the period-derived block length (LCM of the
/// rounded target periods when several are given), then reduce to the band
/// and pointwise mean.
inline VbpbbResult vbpbb_run(const TimeSeries& observed, std::span<const KzftParams> targets,
                             std::size_t replicates, std::uint64_t seed, double level,
                             const VbpbbOptions& options = {}) {
    if (targets.empty()) throw std::invalid_argument("vbpbb_run: need at least one filter target");
    VbpbbResult result;
    result.components.reserve(targets.size());
    for (const auto& p : targets) result.components.push_back(extract_pc(observed, p));
    result.pc_sum = sum_pc(result.components);

    const std::int64_t block =
        options.block_length
            ? *options.block_length
            : detail::default_block_length(targets, static_cast<std::int64_t>(observed.length()));
    result.ensemble = pbb_resample(result.pc_sum, block, replicates, seed, options.threads);
    result.ensemble.source = "pc_sum of " + std::to_string(targets.size()) + " component(s)";
    result.pointwise = pointwise_mean(result.ensemble, options.threads);
    result.band = ci_band(result.ensemble, level, options.band_mode, options.threads);
    return result;
}

}  // namespace vbpbb
