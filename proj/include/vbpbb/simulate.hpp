#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vbpbb/rng.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

/// One sinusoid: amplitude * sin(2*pi*t / period + phase), phase in radians.
struct SineComponent {
    double amplitude = 0.0;
    double period = 0.0;
    double phase = 0.0;
};

struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};

/// gamma(shape, scale) + offset; offset = -10 recentres a Gamma(2, 5) at zero.
struct GammaShifted {
    double shape = 1.0;
    double scale = 1.0;
    double offset = 0.0;
};

using NoiseDistribution = std::variant<Normal, GammaShifted>;

enum class NoiseCombine {
    /// eps_t = sum_i c_i * draw_i(t); every term draws independently at each t.
    coefficient_sum,
    /// coefficients are selection probabilities (>= 0, summing to 1); at each
    /// t one term is picked and drawn.
    probabilistic_mixture,
};

struct NoiseTerm {
    double coefficient = 1.0;
    NoiseDistribution distribution;
};

struct NoiseSpec {
    std::vector<NoiseTerm> terms;
    NoiseCombine combine = NoiseCombine::coefficient_sum;
};

/// Additive level shift over the closed window [start, end] (1-based times).
struct EventSpec {
    std::int64_t start = 1;
    std::int64_t end = 1;
    double shift = 0.0;
};

/// Adds slope * t at time t.
struct TrendSpec {
    double slope = 0.0;
};

enum class ApplyTo { truth_and_observed };

struct ScenarioConfig {
    std::int64_t length = 0;
    std::vector<SineComponent> components;
    std::optional<NoiseSpec> noise;
    std::optional<EventSpec> event;
    std::optional<TrendSpec> trend;
    std::uint64_t seed = 0;
    ApplyTo apply_event_to = ApplyTo::truth_and_observed;
    ApplyTo apply_trend_to = ApplyTo::truth_and_observed;
};

struct ScenarioData {
    TimeSeries baseline;  ///< pure signal, no event/trend; reference for bias metrics
    TimeSeries truth;     ///< baseline with event/trend applied
    TimeSeries observed;  ///< truth + noise
    ScenarioConfig config;
    std::vector<std::string> warnings;
};

inline void validate(const SineComponent& c) {
    if (!std::isfinite(c.amplitude) || !std::isfinite(c.period) || !std::isfinite(c.phase))
        throw std::invalid_argument("sine component: parameters must be finite");
    if (c.amplitude < 0.0) throw std::invalid_argument("sine component: amplitude must be >= 0");
    if (!(c.period > 1.0)) throw std::invalid_argument("sine component: period must be > 1");
}

inline void validate(const NoiseSpec& spec) {
    for (const auto& term : spec.terms) {
        if (!std::isfinite(term.coefficient))
            throw std::invalid_argument("noise term: coefficient must be finite");
        std::visit(
            [](const auto& d) {
                using D = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<D, Normal>) {
                    if (!std::isfinite(d.mean) || !(d.sd > 0.0) || !std::isfinite(d.sd))
                        throw std::invalid_argument("normal noise: need finite mean and sd > 0");
                } else {
                    if (!(d.shape > 0.0) || !(d.scale > 0.0) || !std::isfinite(d.offset) ||
                        !std::isfinite(d.shape) || !std::isfinite(d.scale))
                        throw std::invalid_argument(
                            "gamma noise: need shape > 0, scale > 0, finite offset");
                }
            },
            term.distribution);
    }
    if (spec.combine == NoiseCombine::probabilistic_mixture) {
        double total = 0.0;
        for (const auto& term : spec.terms) {
            if (term.coefficient < 0.0)
                throw std::invalid_argument("mixture noise: weights must be >= 0");
            total += term.coefficient;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("mixture noise: weights must sum to 1");
    }
}

/// Hard errors throw; soft issues are returned as warnings.
inline std::vector<std::string> validate(const ScenarioConfig& cfg) {
    if (cfg.length < 2) throw std::invalid_argument("scenario: length must be >= 2");
    std::vector<std::string> warnings;
    double max_period = 0.0;
    for (const auto& c : cfg.components) {
        validate(c);
        max_period = std::max(max_period, c.period);
        if (c.period <= 2.0)
            warnings.push_back("component period " + std::to_string(c.period) +
                               " is at or below the two-sample resolution limit");
    }
    if (max_period > static_cast<double>(cfg.length))
        throw std::invalid_argument("scenario: length must cover the longest component period");
    if (cfg.noise) validate(*cfg.noise);
    if (cfg.event) {
        if (cfg.event->start < 1 || cfg.event->end < cfg.event->start ||
            cfg.event->end > cfg.length)
            throw std::invalid_argument("scenario: event window must satisfy 1 <= start <= end <= length");
        if (!std::isfinite(cfg.event->shift))
            throw std::invalid_argument("scenario: event shift must be finite");
    }
    if (cfg.trend && !std::isfinite(cfg.trend->slope))
        throw std::invalid_argument("scenario: trend slope must be finite");
    return warnings;
}

/// Sum of sine components evaluated at t = 1..length. Empty component list
/// yields the zero series.
inline TimeSeries generate_signal(std::span<const SineComponent> components, std::int64_t length) {
    if (length < 1) throw std::invalid_argument("generate_signal: length must be >= 1");
    for (const auto& c : components) validate(c);
    TimeSeries out{1, std::vector<double>(static_cast<std::size_t>(length), 0.0)};
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (const auto& c : components) {
        for (std::int64_t t = 1; t <= length; ++t) {
            out.values[static_cast<std::size_t>(t - 1)] +=
                c.amplitude * std::sin(two_pi * static_cast<double>(t) / c.period + c.phase);
        }
    }
    return out;
}

namespace detail {

inline double draw_noise(Rng& rng, const NoiseDistribution& dist) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using D = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<D, Normal>)
                return rng.normal(d.mean, d.sd);
            else
                return rng.gamma(d.shape, d.scale) + d.offset;
        },
        dist);
}

}  // namespace detail

/// Length-T series of i.i.d. noise draws. Identical (spec, length, seed)
/// produce bit-identical output: term i consumes the child stream
/// (noise_term, i), and the mixture selector consumes (noise_select, 0).
inline TimeSeries generate_noise(const NoiseSpec& spec, std::int64_t length, std::uint64_t seed) {
    if (length < 1) throw std::invalid_argument("generate_noise: length must be >= 1");
    validate(spec);
    TimeSeries out{1, std::vector<double>(static_cast<std::size_t>(length), 0.0)};
    if (spec.terms.empty()) return out;

    const Rng master(seed);
    std::vector<Rng> streams;
    streams.reserve(spec.terms.size());
    for (std::size_t i = 0; i < spec.terms.size(); ++i)
        streams.push_back(master.child(StreamDomain::noise_term, i));

    if (spec.combine == NoiseCombine::coefficient_sum) {
        for (std::size_t i = 0; i < spec.terms.size(); ++i) {
            const auto& term = spec.terms[i];
            for (auto& v : out.values) v += term.coefficient * detail::draw_noise(streams[i], term.distribution);
        }
    } else {
        Rng selector = master.child(StreamDomain::noise_select, 0);
        for (auto& v : out.values) {
            const double u = selector.unit();
            double cumulative = 0.0;
            std::size_t pick = spec.terms.size() - 1;
            for (std::size_t i = 0; i < spec.terms.size(); ++i) {
                cumulative += spec.terms[i].coefficient;
                if (u < cumulative) {
                    pick = i;
                    break;
                }
            }
            v = detail::draw_noise(streams[pick], spec.terms[pick].distribution);
        }
    }
    return out;
}

/// Shifts values inside the closed window [event.start, event.end]; all other
/// points are returned bit-identical.
inline TimeSeries apply_event(const TimeSeries& series, const EventSpec& event) {
    validate(series);
    if (!std::isfinite(event.shift))
        throw std::invalid_argument("apply_event: shift must be finite");
    if (event.start > event.end)
        throw std::out_of_range("apply_event: window start must not exceed end");
    if (event.start < series.start_index || event.end > series.last_time())
        throw std::out_of_range("apply_event: window outside series bounds");
    TimeSeries out = series;
    for (std::int64_t t = event.start; t <= event.end; ++t)
        out.values[static_cast<std::size_t>(t - series.start_index)] += event.shift;
    return out;
}

inline TimeSeries apply_trend(const TimeSeries& series, const TrendSpec& trend) {
    validate(series);
    if (!std::isfinite(trend.slope))
        throw std::invalid_argument("apply_trend: slope must be finite");
    TimeSeries out = series;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += trend.slope * static_cast<double>(out.time_at(i));
    return out;
}

/// truth = trend(event(signal)); observed = truth + noise. Event and trend
/// land in both truth and observed; with noise omitted, observed == truth.
inline ScenarioData build_scenario(const ScenarioConfig& cfg) {
    ScenarioData data;
    data.warnings = validate(cfg);
    data.config = cfg;
    data.baseline = generate_signal(cfg.components, cfg.length);
    data.truth = data.baseline;
    if (cfg.event) data.truth = apply_event(data.truth, *cfg.event);
    if (cfg.trend) data.truth = apply_trend(data.truth, *cfg.trend);
    if (cfg.noise)
        data.observed = add(data.truth, generate_noise(*cfg.noise, cfg.length, cfg.seed));
    else
        data.observed = data.truth;
    return data;
}

/// The three study scenarios: a 25-sample sine of amplitude 0.8 and phase 100
/// over T = 2500 under mixed normal/gamma noise, optionally with a -4 level
/// shift on [1500, 1600] ("event") or a 0.001/step ramp ("trend").
inline ScenarioConfig scenario_preset(const std::string& name, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.length = 2500;
    cfg.components = {SineComponent{0.8, 25.0, 100.0}};
    cfg.noise = NoiseSpec{
        {NoiseTerm{0.5, Normal{0.0, 3.0}}, NoiseTerm{0.5, GammaShifted{2.0, 5.0, -10.0}}},
        NoiseCombine::coefficient_sum};
    cfg.seed = seed;
    if (name == "original") {
        // base configuration
    } else if (name == "event") {
        cfg.event = EventSpec{1500, 1600, -4.0};
    } else if (name == "trend") {
        cfg.trend = TrendSpec{0.001};
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    return cfg;
}

}  // namespace vbpbb
