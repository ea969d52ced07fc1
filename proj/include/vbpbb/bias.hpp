#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vbpbb/resample.hpp"
#include "vbpbb/simulate.hpp"
#include "vbpbb/spectral.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

/// A series bias is measured against: the known truth for simulations, or
/// the extracted PC sum when the truth is unavailable.
struct Reference {
    enum class Kind { true_reference, sample_reference };
    Kind kind = Kind::true_reference;
    TimeSeries data;
};

inline double overall_mean(const TimeSeries& series) {
    validate(series, "overall_mean");
    return mean_of(series.values);
}

inline std::vector<std::size_t> phase_counts(std::int64_t start_index, std::size_t length,
                                             std::int64_t period) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(period), 0);
    for (std::size_t i = 0; i < length; ++i)
        ++counts[static_cast<std::size_t>(phase_of(start_index + static_cast<std::int64_t>(i), period) - 1)];
    return counts;
}

/// Per-phase means: entry k (1-based) averages the values at all t with
/// phase_of(t, P) == k. Phase groups may be unequal when P does not divide T.
inline std::vector<double> periodic_mean(const TimeSeries& series, std::int64_t period) {
    validate(series, "periodic_mean");
    if (period < 1) throw std::invalid_argument("periodic_mean: period must be >= 1");
    if (series.length() < static_cast<std::size_t>(period))
        throw std::invalid_argument("periodic_mean: series shorter than one period");
    std::vector<MeanAccumulator> acc(static_cast<std::size_t>(period));
    for (std::size_t i = 0; i < series.length(); ++i)
        acc[static_cast<std::size_t>(phase_of(series.time_at(i), period) - 1)].add(series.values[i]);
    std::vector<double> out(static_cast<std::size_t>(period));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = acc[k].mean();
    return out;
}

struct EnsembleMeans {
    double overall = 0.0;          ///< grand mean over all B x T cells
    TimeSeries pointwise;          ///< per-t mean over B
    std::vector<double> periodic;  ///< per-phase mean over all (b, t) in that phase
};

/// Ensemble reductions. The grand mean is the mean of the pointwise means and
/// the periodic entry k is the mean of the pointwise means over phase-k
/// positions, i.e. normalized by N_k * B, so a constant ensemble reproduces
/// that constant at every level.
inline EnsembleMeans ensemble_means(const BootstrapEnsemble& ens,
                                    std::optional<std::int64_t> period = std::nullopt,
                                    unsigned threads = 1) {
    EnsembleMeans out;
    out.pointwise = pointwise_mean(ens, threads);
    out.overall = mean_of(out.pointwise.values);
    const std::int64_t p = period.value_or(ens.block_length);
    if (p < 1) throw std::invalid_argument("ensemble_means: period must be >= 1");
    out.periodic = periodic_mean(out.pointwise, p);
    return out;
}

inline double bias(double estimate, double reference) { return estimate - reference; }

inline TimeSeries bias(const TimeSeries& estimate, const TimeSeries& reference) {
    return subtract(estimate, reference);
}

inline std::vector<double> bias(std::span<const double> estimate,
                                std::span<const double> reference) {
    if (estimate.size() != reference.size())
        throw std::invalid_argument("bias: shapes differ");
    std::vector<double> out(estimate.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = estimate[i] - reference[i];
    return out;
}

/// Global correction: subtract one scalar everywhere.
inline TimeSeries correct(const TimeSeries& series, double global_bias) {
    TimeSeries out = series;
    for (auto& v : out.values) v -= global_bias;
    return out;
}

/// Pointwise correction: subtract a full-length bias series.
inline TimeSeries correct(const TimeSeries& series, const TimeSeries& pointwise_bias) {
    return subtract(series, pointwise_bias);
}

/// Periodic correction: subtract the length-P bias vector tiled by phase.
inline TimeSeries correct(const TimeSeries& series, std::span<const double> periodic_bias) {
    if (periodic_bias.empty()) throw std::invalid_argument("correct: empty periodic bias");
    const auto period = static_cast<std::int64_t>(periodic_bias.size());
    TimeSeries out = series;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] -= periodic_bias[static_cast<std::size_t>(phase_of(out.time_at(i), period) - 1)];
    return out;
}

/// Band corrections shift lower, center, and upper by the same amount, so the
/// band width is preserved.
template <class BiasArg>
inline BandEstimate correct(const BandEstimate& band, const BiasArg& bias_value) {
    BandEstimate out = band;
    out.lower = correct(band.lower, bias_value);
    out.center = correct(band.center, bias_value);
    out.upper = correct(band.upper, bias_value);
    return out;
}

/// Overall, pointwise, and periodic bias in both reference variants.
struct BiasReport {
    std::string scenario_id;

    struct Overall {
        double true_mean = 0.0;
        double sample_mean = 0.0;
        double vbpbb_mean = 0.0;
        double true_bias = 0.0;       ///< vbpbb_mean - true_mean
        double estimated_bias = 0.0;  ///< vbpbb_mean - sample_mean
    } overall;

    TimeSeries pointwise_true;    ///< pointwise mean - true reference
    TimeSeries pointwise_sample;  ///< pointwise mean - PC sum
    std::vector<double> periodic_true;
    std::vector<double> periodic_sample;

    std::int64_t period = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<KzftParams> filters;
    /// Periodic ensemble means divide by N_k * B (not the bare N_k), so a
    /// constant ensemble reports zero periodic bias against itself.
    std::string periodic_normalization = "N_k*B";
};

/// Assembles the full report. The true reference is the scenario baseline
/// (signal without event or trend), applied uniformly to the overall,
/// pointwise, and periodic metrics of every scenario; the sample reference is
/// the extracted PC sum.
inline BiasReport make_bias_report(const ScenarioData& scenario, const VbpbbResult& result,
                                   std::string scenario_id, unsigned threads = 1) {
    const TimeSeries& truth = scenario.baseline;
    const TimeSeries& sample = result.pc_sum;
    if (truth.length() != sample.length() || truth.start_index != sample.start_index)
        throw std::invalid_argument("make_bias_report: scenario and result shapes differ");

    BiasReport report;
    report.scenario_id = std::move(scenario_id);
    report.period = result.ensemble.block_length;
    report.replicates = result.ensemble.replicates;
    report.seed = result.ensemble.seed;
    for (const auto& c : result.components) report.filters.push_back(c.params);

    const EnsembleMeans means = ensemble_means(result.ensemble, std::nullopt, threads);
    report.overall.true_mean = overall_mean(truth);
    report.overall.sample_mean = overall_mean(sample);
    report.overall.vbpbb_mean = means.overall;
    report.overall.true_bias = bias(means.overall, report.overall.true_mean);
    report.overall.estimated_bias = bias(means.overall, report.overall.sample_mean);

    report.pointwise_true = bias(means.pointwise, truth);
    report.pointwise_sample = bias(means.pointwise, sample);
    report.periodic_true = bias(means.periodic, periodic_mean(truth, report.period));
    report.periodic_sample = bias(means.periodic, periodic_mean(sample, report.period));
    return report;
}

}  // namespace vbpbb
