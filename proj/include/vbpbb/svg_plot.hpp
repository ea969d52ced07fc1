#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vbpbb/csv.hpp"
#include "vbpbb/resample.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

// Static SVG renderer for inspection plots: a line/band time-domain view and
// a per-phase bias view. Deliberately minimal; styling is not configurable.

namespace plot_detail {

struct Frame {
    double width = 960.0, height = 440.0;
    double left = 64.0, right = 16.0, top = 28.0, bottom = 40.0;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

inline std::string num(double v) {
    // trimmed fixed form is fine for pixel coordinates
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline void expand_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double pad = std::abs(lo) > 1e-12 ? std::abs(lo) * 0.1 : 1.0;
        lo -= pad;
        hi += pad;
    } else {
        const double pad = (hi - lo) * 0.06;
        lo -= pad;
        hi += pad;
    }
}

inline std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
        out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
    return out;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

class Canvas {
public:
    explicit Canvas(Frame frame, const std::string& title) : frame_(frame) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(frame_.width) +
                 "\" height=\"" + num(frame_.height) + "\" viewBox=\"0 0 " + num(frame_.width) +
                 " " + num(frame_.height) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        if (!title.empty())
            body_ += "<text x=\"" + num(frame_.left) + "\" y=\"18\" font-family=\"sans-serif\" "
                     "font-size=\"13\" fill=\"#222\">" + title + "</text>\n";
    }

    void comment(const std::string& text) { body_ += "<!-- " + text + " -->\n"; }

    void axes() {
        const double x0 = frame_.left, x1 = frame_.width - frame_.right;
        const double y0 = frame_.height - frame_.bottom, y1 = frame_.top;
        body_ += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) +
                 "\" height=\"" + num(y0 - y1) + "\" fill=\"none\" stroke=\"#888\"/>\n";
        for (double v : ticks(frame_.x_min, frame_.x_max)) {
            const double x = frame_.px(v);
            body_ += "<line x1=\"" + num(x) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x) +
                     "\" y2=\"" + num(y0 + 4) + "\" stroke=\"#888\"/>\n";
            body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + 16) +
                     "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
                     "text-anchor=\"middle\">" + tick_label(v) + "</text>\n";
        }
        for (double v : ticks(frame_.y_min, frame_.y_max)) {
            const double y = frame_.py(v);
            body_ += "<line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) +
                     "\" y2=\"" + num(y) + "\" stroke=\"#888\"/>\n";
            body_ += "<text x=\"" + num(x0 - 7) + "\" y=\"" + num(y + 4) +
                     "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\" "
                     "text-anchor=\"end\">" + tick_label(v) + "</text>\n";
        }
    }

    void polyline(std::span<const std::pair<double, double>> pts, const std::string& color,
                  double width) {
        if (pts.empty()) return;
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + num(width) +
                 "\" points=\"";
        for (const auto& [x, y] : pts) body_ += num(frame_.px(x)) + "," + num(frame_.py(y)) + " ";
        body_ += "\"/>\n";
    }

    /// Band polygon: upper edge left-to-right then lower edge right-to-left.
    /// A zero-width band degenerates to a line without negative-area artifacts.
    void band(std::span<const std::pair<double, double>> upper,
              std::span<const std::pair<double, double>> lower, const std::string& color) {
        if (upper.empty() || lower.empty()) return;
        body_ += "<polygon fill=\"" + color + "\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
        for (const auto& [x, y] : upper) body_ += num(frame_.px(x)) + "," + num(frame_.py(y)) + " ";
        for (auto it = lower.rbegin(); it != lower.rend(); ++it)
            body_ += num(frame_.px(it->first)) + "," + num(frame_.py(it->second)) + " ";
        body_ += "\"/>\n";
    }

    void legend_entry(const std::string& label, const std::string& color) {
        const double x = frame_.width - frame_.right - 150.0;
        const double y = frame_.top + 14.0 + 16.0 * static_cast<double>(legend_count_++);
        body_ += "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(x + 18) +
                 "\" y2=\"" + num(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"3\"/>\n";
        body_ += "<text x=\"" + num(x + 24) + "\" y=\"" + num(y) +
                 "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">" + label +
                 "</text>\n";
    }

    void write(const std::filesystem::path& path) {
        body_ += "</svg>\n";
        atomic_write_text(path, body_);
    }

private:
    Frame frame_;
    std::string body_;
    int legend_count_ = 0;
};

inline std::vector<std::pair<double, double>> window_points(const TimeSeries& series,
                                                            std::int64_t from, std::int64_t to) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < series.length(); ++i) {
        const std::int64_t t = series.time_at(i);
        if (t < from || t > to) continue;
        pts.emplace_back(static_cast<double>(t), series.values[i]);
    }
    return pts;
}

}  // namespace plot_detail

/// Time-domain view over [from, to]: observed in light gray, the band as a
/// shaded region with its center line, and the true signal highlighted.
/// Optional inputs may be null. Throws std::out_of_range when the window
/// falls outside the data.
inline void write_series_band_svg(const std::filesystem::path& path, const std::string& title,
                                  std::int64_t from, std::int64_t to, const TimeSeries* observed,
                                  const TimeSeries* truth, const BandEstimate* band) {
    const TimeSeries* any = observed ? observed : (truth ? truth : (band ? &band->center : nullptr));
    if (!any) throw std::invalid_argument("write_series_band_svg: nothing to plot");
    if (from > to || from < any->start_index || to > any->last_time())
        throw std::out_of_range("plot window outside the series range [" +
                                std::to_string(any->start_index) + ", " +
                                std::to_string(any->last_time()) + "]");

    using namespace plot_detail;
    double y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    auto scan = [&](const TimeSeries& s) {
        for (std::size_t i = 0; i < s.length(); ++i) {
            const std::int64_t t = s.time_at(i);
            if (t < from || t > to) continue;
            if (first) {
                y_lo = y_hi = s.values[i];
                first = false;
            } else {
                y_lo = std::min(y_lo, s.values[i]);
                y_hi = std::max(y_hi, s.values[i]);
            }
        }
    };
    if (observed) scan(*observed);
    if (truth) scan(*truth);
    if (band) {
        scan(band->lower);
        scan(band->upper);
    }
    expand_range(y_lo, y_hi);

    Frame frame;
    frame.x_min = static_cast<double>(from);
    frame.x_max = static_cast<double>(to);
    if (from == to) {  // single-point window still needs a nonzero axis span
        frame.x_min -= 1.0;
        frame.x_max += 1.0;
    }
    frame.y_min = y_lo;
    frame.y_max = y_hi;

    Canvas canvas(frame, title);
    canvas.comment("window " + std::to_string(from) + " " + std::to_string(to));
    canvas.axes();
    if (observed) {
        canvas.polyline(window_points(*observed, from, to), "#c9c9c9", 1.0);
        canvas.legend_entry("observed", "#c9c9c9");
    }
    if (band) {
        canvas.band(window_points(band->upper, from, to), window_points(band->lower, from, to),
                    "#9ec9ff");
        canvas.polyline(window_points(band->center, from, to), "#2c6ee8", 1.2);
        canvas.legend_entry("band center", "#2c6ee8");
    }
    if (truth) {
        canvas.polyline(window_points(*truth, from, to), "#e8842c", 1.6);
        canvas.legend_entry("truth", "#e8842c");
    }
    canvas.write(path);
}

/// Per-phase bias curves (one per labelled scenario) on shared axes.
inline void write_periodic_bias_svg(
    const std::filesystem::path& path, const std::string& title,
    std::span<const std::pair<std::string, std::vector<double>>> curves) {
    if (curves.empty()) throw std::invalid_argument("write_periodic_bias_svg: no curves");
    using namespace plot_detail;
    std::size_t period = 0;
    double y_lo = 0.0, y_hi = 0.0;
    bool first = true;
    for (const auto& [label, values] : curves) {
        period = std::max(period, values.size());
        for (double v : values) {
            if (first) {
                y_lo = y_hi = v;
                first = false;
            } else {
                y_lo = std::min(y_lo, v);
                y_hi = std::max(y_hi, v);
            }
        }
    }
    if (period == 0) throw std::invalid_argument("write_periodic_bias_svg: empty curves");
    expand_range(y_lo, y_hi);

    Frame frame;
    frame.x_min = 1.0;
    frame.x_max = period > 1 ? static_cast<double>(period) : 2.0;
    frame.y_min = y_lo;
    frame.y_max = y_hi;

    static const char* palette[] = {"#2c6ee8", "#d8342c", "#e8842c", "#2ca05a", "#8e44ad"};
    Canvas canvas(frame, title);
    canvas.axes();
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& [label, values] = curves[c];
        std::vector<std::pair<double, double>> pts;
        pts.reserve(values.size());
        for (std::size_t k = 0; k < values.size(); ++k)
            pts.emplace_back(static_cast<double>(k + 1), values[k]);
        const std::string color = palette[c % 5];
        canvas.polyline(pts, color, 1.5);
        canvas.legend_entry(label, color);
    }
    canvas.write(path);
}

}  // namespace vbpbb
