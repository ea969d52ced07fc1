#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vbpbb/time_series.hpp"

namespace vbpbb {

struct SpectrumBin {
    double frequency = 0.0;  ///< cycles per sample, in (0, 0.5]
    double power = 0.0;
};

/// Periodogram over the Fourier frequencies j/T, j = 1..floor(T/2).
struct Spectrum {
    std::vector<SpectrumBin> bins;
    std::int64_t series_length = 0;
};

struct DetectedPeriod {
    double frequency = 0.0;
    double period = 0.0;
    double power = 0.0;
    bool degenerate = false;  ///< power was exactly zero (tie-break fallback)
};

/// Mean-removed periodogram: power at j/T is |sum_n y~_n e^{-2pi i j n / T}|^2 / T.
/// Only the half-spectrum j = 1..floor(T/2) is reported; a constant series
/// yields all-zero power. With this normalization the half-spectrum power of
/// an odd-length series sums to half its centered sum of squares.
inline Spectrum periodogram(const TimeSeries& series) {
    validate(series, "periodogram");
    const std::size_t n = series.length();
    if (n < 4) throw std::invalid_argument("periodogram: need at least 4 samples");

    const double mean = mean_of(series.values);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = series.values[i] - mean;

    // One shared table of the n-th roots of unity; bin j walks it with
    // stride j (indices reduced mod n), so no per-bin trig is needed.
    std::vector<double> cos_tab(n), sin_tab(n);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t r = 0; r < n; ++r) {
        const double angle = -two_pi * static_cast<double>(r) / static_cast<double>(n);
        cos_tab[r] = std::cos(angle);
        sin_tab[r] = std::sin(angle);
    }

    Spectrum spec;
    spec.series_length = static_cast<std::int64_t>(n);
    const std::size_t half = n / 2;
    spec.bins.resize(half);
    for (std::size_t j = 1; j <= half; ++j) {
        double re = 0.0, im = 0.0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < n; ++i) {
            re += centered[i] * cos_tab[idx];
            im += centered[i] * sin_tab[idx];
            idx += j;
            if (idx >= n) idx -= n;
        }
        spec.bins[j - 1].frequency = static_cast<double>(j) / static_cast<double>(n);
        spec.bins[j - 1].power = (re * re + im * im) / static_cast<double>(n);
    }
    return spec;
}

/// Top bins by power, descending; ties broken toward the lower frequency.
inline std::vector<DetectedPeriod> detect_periods(const Spectrum& spectrum, std::size_t top_n) {
    if (top_n < 1) throw std::invalid_argument("detect_periods: top_n must be >= 1");
    if (top_n > spectrum.bins.size())
        throw std::invalid_argument("detect_periods: top_n exceeds bin count");
    std::vector<std::size_t> order(spectrum.bins.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (spectrum.bins[a].power != spectrum.bins[b].power)
            return spectrum.bins[a].power > spectrum.bins[b].power;
        return spectrum.bins[a].frequency < spectrum.bins[b].frequency;
    });
    std::vector<DetectedPeriod> out;
    out.reserve(top_n);
    for (std::size_t i = 0; i < top_n; ++i) {
        const auto& bin = spectrum.bins[order[i]];
        out.push_back({bin.frequency, 1.0 / bin.frequency, bin.power, bin.power == 0.0});
    }
    return out;
}

/// Bandpass parameters: target frequency f (cycles/sample), odd window m,
/// iterations k. Total filter support is k(m-1)+1 samples.
struct KzftParams {
    double frequency = 0.0;
    std::int64_t window = 3;
    std::int64_t iterations = 1;
};

inline void validate(const KzftParams& p) {
    if (!(p.frequency > 0.0) || p.frequency > 0.5 || !std::isfinite(p.frequency))
        throw std::invalid_argument("kzft: frequency must lie in (0, 0.5]");
    if (p.window < 3 || p.window % 2 == 0)
        throw std::invalid_argument("kzft: window must be an odd integer >= 3");
    if (p.iterations < 1) throw std::invalid_argument("kzft: iterations must be >= 1");
}

inline std::int64_t kzft_support(const KzftParams& p) { return p.iterations * (p.window - 1) + 1; }
inline std::int64_t kzft_margin(const KzftParams& p) { return p.iterations * (p.window - 1) / 2; }

/// Smallest odd integer at or after round(x); the default window for period P
/// is round_to_odd(10 * P + 1).
inline std::int64_t round_to_odd(double x) {
    auto n = static_cast<std::int64_t>(std::llround(x));
    if (n % 2 == 0) ++n;
    return std::max<std::int64_t>(n, 3);
}

/// Complex demodulation followed by k passes of a centered length-m moving
/// average:
///
///   Z(t) = MA_m^k[ y(u) e^{-i 2 pi f u} ](t),
///
/// so that for k = 1, Z(t) = (1/m) sum_{s=-(m-1)/2}^{(m-1)/2} y(t+s) e^{-i 2 pi f (t+s)}.
/// Demodulation uses absolute time u = start_index + offset. Windows that run
/// past either end are truncated and renormalized by the actual sample count,
/// keeping the output full length; the first and last kzft_margin(p) points
/// are computed that way.
inline std::vector<std::complex<double>> kzft_demodulate(const TimeSeries& series,
                                                         const KzftParams& params) {
    validate(series, "kzft");
    validate(params);
    const auto n = static_cast<std::int64_t>(series.length());
    if (kzft_support(params) > n)
        throw std::invalid_argument("kzft: filter support k(m-1)+1 exceeds series length (parameter m)");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<std::complex<double>> current(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const auto t = static_cast<double>(series.time_at(static_cast<std::size_t>(i)));
        // Reduce f*t to its fractional cycle count before converting to an
        // angle; keeps precision at large t.
        const double angle = -two_pi * std::fmod(params.frequency * t, 1.0);
        current[static_cast<std::size_t>(i)] =
            series.values[static_cast<std::size_t>(i)] *
            std::complex<double>(std::cos(angle), std::sin(angle));
    }

    const std::int64_t half = (params.window - 1) / 2;
    std::vector<std::complex<double>> next(static_cast<std::size_t>(n));
    for (std::int64_t pass = 0; pass < params.iterations; ++pass) {
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int64_t lo = std::max<std::int64_t>(0, i - half);
            const std::int64_t hi = std::min<std::int64_t>(n - 1, i + half);
            std::complex<double> sum{0.0, 0.0};
            for (std::int64_t s = lo; s <= hi; ++s) sum += current[static_cast<std::size_t>(s)];
            next[static_cast<std::size_t>(i)] = sum / static_cast<double>(hi - lo + 1);
        }
        std::swap(current, next);
    }
    return current;
}

/// KZFT-extracted periodic component, full input length; the kzft_margin(p)
/// samples at each end came from truncated windows.
struct PcComponent {
    TimeSeries values;
    double frequency = 0.0;
    KzftParams params;
    std::int64_t margin = 0;

    bool in_margin(std::int64_t t) const {
        const std::int64_t offset = t - values.start_index;
        return offset < margin || offset >= static_cast<std::int64_t>(values.length()) - margin;
    }
};

/// Reconstructs the real bandpass component: y^(t) = 2 Re( Z(t) e^{+i 2 pi f t} ).
inline PcComponent extract_pc(const TimeSeries& series, const KzftParams& params) {
    const auto z = kzft_demodulate(series, params);
    PcComponent pc;
    pc.frequency = params.frequency;
    pc.params = params;
    pc.margin = kzft_margin(params);
    pc.values.start_index = series.start_index;
    pc.values.values.resize(z.size());
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto t = static_cast<double>(series.time_at(i));
        const double angle = two_pi * std::fmod(params.frequency * t, 1.0);
        const std::complex<double> carrier(std::cos(angle), std::sin(angle));
        pc.values.values[i] = 2.0 * (z[i] * carrier).real();
    }
    return pc;
}

/// Elementwise sum of components. An empty list yields a zero series of
/// `declared_length` (which must then be provided).
inline TimeSeries sum_pc(std::span<const PcComponent> components,
                         std::optional<std::int64_t> declared_length = std::nullopt) {
    if (components.empty()) {
        if (!declared_length || *declared_length < 1)
            throw std::invalid_argument("sum_pc: empty component list needs a declared length");
        return TimeSeries{1, std::vector<double>(static_cast<std::size_t>(*declared_length), 0.0)};
    }
    TimeSeries out = components.front().values;
    for (std::size_t i = 1; i < components.size(); ++i) {
        const auto& c = components[i].values;
        if (c.length() != out.length() || c.start_index != out.start_index)
            throw std::invalid_argument("sum_pc: component shapes differ");
        for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] += c.values[j];
    }
    return out;
}

}  // namespace vbpbb
