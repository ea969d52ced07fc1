#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vbpbb {

/// Unit-spaced real-valued sequence. Element i sits at time start_index + i;
/// the library uses the 1-based convention (start_index = 1) throughout, so
/// a series of length T covers t = 1,...,T.
struct TimeSeries {
    std::int64_t start_index = 1;
    std::vector<double> values;

    TimeSeries() = default;
    TimeSeries(std::int64_t start, std::vector<double> v)
        : start_index(start), values(std::move(v)) {}

    std::size_t length() const { return values.size(); }
    std::int64_t time_at(std::size_t i) const { return start_index + static_cast<std::int64_t>(i); }
    std::int64_t last_time() const { return start_index + static_cast<std::int64_t>(values.size()) - 1; }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool operator==(const TimeSeries&) const = default;
};

inline void validate(const TimeSeries& s, const char* what = "series") {
    if (s.values.empty())
        throw std::invalid_argument(std::string(what) + ": must contain at least one value");
    for (double v : s.values)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": values must be finite");
}

/// Cycle position of 1-based time t for period P: ((t - 1) mod P) + 1, in 1..P.
/// Phase 1 is the first position of every cycle; phase P collects t ≡ 0 (mod P).
inline std::int64_t phase_of(std::int64_t t, std::int64_t period) {
    std::int64_t r = (t - 1) % period;
    if (r < 0) r += period;
    return r + 1;
}

/// Anchored, compensated (Neumaier) mean accumulator. Serial insertion order
/// is part of the contract: reductions that must agree bit-for-bit feed it in
/// a fixed order. Anchoring at the first element makes the mean of a constant
/// stream return that constant exactly.
class MeanAccumulator {
public:
    void add(double x) {
        if (count_ == 0) anchor_ = x;
        const double d = x - anchor_;
        const double t = sum_ + d;
        if (std::abs(sum_) >= std::abs(d))
            comp_ += (sum_ - t) + d;
        else
            comp_ += (d - t) + sum_;
        sum_ = t;
        ++count_;
    }

    std::size_t count() const { return count_; }

    double mean() const {
        if (count_ == 0) throw std::logic_error("MeanAccumulator: empty");
        return anchor_ + (sum_ + comp_) / static_cast<double>(count_);
    }

private:
    double anchor_ = 0.0;
    double sum_ = 0.0;
    double comp_ = 0.0;
    std::size_t count_ = 0;
};

inline double mean_of(std::span<const double> xs) {
    MeanAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.mean();
}

inline TimeSeries add(const TimeSeries& a, const TimeSeries& b) {
    if (a.length() != b.length() || a.start_index != b.start_index)
        throw std::invalid_argument("add: series shapes differ");
    TimeSeries out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

inline TimeSeries subtract(const TimeSeries& a, const TimeSeries& b) {
    if (a.length() != b.length() || a.start_index != b.start_index)
        throw std::invalid_argument("subtract: series shapes differ");
    TimeSeries out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

}  // namespace vbpbb
