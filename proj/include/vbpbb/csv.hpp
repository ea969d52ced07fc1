#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "vbpbb/bias.hpp"
#include "vbpbb/resample.hpp"
#include "vbpbb/spectral.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

/// Shortest decimal representation that reloads to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::runtime_error(where + ": malformed number '" + std::string(text) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view text, const std::string& where) {
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw std::runtime_error(where + ": malformed integer '" + std::string(text) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return fields;
}

/// Writes content to `path + ".tmp"` and renames it into place, so readers
/// never observe a half-written file.
inline void atomic_write_text(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::string_view> non_empty_lines(std::string_view text,
                                                     std::vector<std::string>& storage) {
    // storage keeps the text alive for the returned views
    storage.clear();
    storage.emplace_back(text);
    std::vector<std::string_view> lines;
    std::string_view body = storage.front();
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto nl = body.find('\n', pos);
        if (nl == std::string_view::npos) nl = body.size();
        auto line = body.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

// ---------------------------------------------------------------- series csv

inline std::string series_to_csv(const TimeSeries& series) {
    std::string out = "t,value\n";
    for (std::size_t i = 0; i < series.length(); ++i) {
        out += std::to_string(series.time_at(i));
        out += ',';
        out += format_double(series.values[i]);
        out += '\n';
    }
    return out;
}

inline void write_series_csv(const std::filesystem::path& path, const TimeSeries& series) {
    atomic_write_text(path, series_to_csv(series));
}

inline TimeSeries read_series_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::vector<std::string> storage;
    const auto lines = non_empty_lines(text, storage);
    if (lines.empty() || !lines.front().starts_with("t,value"))
        throw std::runtime_error(path.string() + ": expected header 't,value'");
    TimeSeries series;
    series.values.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() < 2)
            throw std::runtime_error(path.string() + ": short row " + std::to_string(i + 1));
        const std::int64_t t = parse_int(fields[0], path.string());
        if (i == 1)
            series.start_index = t;
        else if (t != series.start_index + static_cast<std::int64_t>(i - 1))
            throw std::runtime_error(path.string() + ": time column must be unit-spaced");
        series.values.push_back(parse_double(fields[1], path.string()));
    }
    if (series.values.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return series;
}

// ------------------------------------------------------------- component csv

inline void write_pc_csv(const std::filesystem::path& path, const PcComponent& pc) {
    std::string out = "t,value,in_margin\n";
    for (std::size_t i = 0; i < pc.values.length(); ++i) {
        const std::int64_t t = pc.values.time_at(i);
        out += std::to_string(t);
        out += ',';
        out += format_double(pc.values.values[i]);
        out += pc.in_margin(t) ? ",1\n" : ",0\n";
    }
    atomic_write_text(path, out);
}

// -------------------------------------------------------------- spectrum csv

inline void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spectrum) {
    std::string out = "frequency,period,power\n";
    for (const auto& bin : spectrum.bins) {
        out += format_double(bin.frequency);
        out += ',';
        out += format_double(1.0 / bin.frequency);
        out += ',';
        out += format_double(bin.power);
        out += '\n';
    }
    atomic_write_text(path, out);
}

inline void write_periods_csv(const std::filesystem::path& path,
                              std::span<const DetectedPeriod> periods) {
    std::string out = "frequency,period,power,degenerate\n";
    for (const auto& p : periods) {
        out += format_double(p.frequency);
        out += ',';
        out += format_double(p.period);
        out += ',';
        out += format_double(p.power);
        out += p.degenerate ? ",1\n" : ",0\n";
    }
    atomic_write_text(path, out);
}

// ------------------------------------------------------------------ band csv

inline void write_band_csv(const std::filesystem::path& path, const BandEstimate& band) {
    std::string out = "t,lower,center,upper\n";
    for (std::size_t i = 0; i < band.center.length(); ++i) {
        out += std::to_string(band.center.time_at(i));
        out += ',';
        out += format_double(band.lower.values[i]);
        out += ',';
        out += format_double(band.center.values[i]);
        out += ',';
        out += format_double(band.upper.values[i]);
        out += '\n';
    }
    atomic_write_text(path, out);
}

inline BandEstimate read_band_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::vector<std::string> storage;
    const auto lines = non_empty_lines(text, storage);
    if (lines.empty() || !lines.front().starts_with("t,lower,center,upper"))
        throw std::runtime_error(path.string() + ": expected header 't,lower,center,upper'");
    BandEstimate band;
    bool first = true;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() < 4)
            throw std::runtime_error(path.string() + ": short row " + std::to_string(i + 1));
        const std::int64_t t = parse_int(fields[0], path.string());
        if (first) {
            band.lower.start_index = band.center.start_index = band.upper.start_index = t;
            first = false;
        }
        band.lower.values.push_back(parse_double(fields[1], path.string()));
        band.center.values.push_back(parse_double(fields[2], path.string()));
        band.upper.values.push_back(parse_double(fields[3], path.string()));
    }
    if (band.center.values.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return band;
}

// ------------------------------------------------------------------ bias csv

struct OverallBiasRow {
    std::string scenario;
    double true_mean = 0.0;
    double sample_mean = 0.0;
    double vbpbb_mean = 0.0;
    double true_bias = 0.0;
    double estimated_bias = 0.0;
};

inline const char* overall_bias_header() {
    return "scenario,true_overall_mean,sample_overall_mean,vbpbb_overall_mean,"
           "true_overall_mean_bias,estimated_overall_mean_bias";
}

inline std::string overall_bias_row_to_csv(const OverallBiasRow& row) {
    std::string out = row.scenario;
    out += ',';
    out += format_double(row.true_mean);
    out += ',';
    out += format_double(row.sample_mean);
    out += ',';
    out += format_double(row.vbpbb_mean);
    out += ',';
    out += format_double(row.true_bias);
    out += ',';
    out += format_double(row.estimated_bias);
    out += '\n';
    return out;
}

inline void write_bias_overall_csv(const std::filesystem::path& path, const BiasReport& report) {
    OverallBiasRow row{report.scenario_id,          report.overall.true_mean,
                  report.overall.sample_mean,  report.overall.vbpbb_mean,
                  report.overall.true_bias,    report.overall.estimated_bias};
    atomic_write_text(path, std::string(overall_bias_header()) + "\n" + overall_bias_row_to_csv(row));
}

inline OverallBiasRow read_bias_overall_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::vector<std::string> storage;
    const auto lines = non_empty_lines(text, storage);
    if (lines.size() < 2 || !lines.front().starts_with("scenario,"))
        throw std::runtime_error(path.string() + ": expected a an overall-bias CSV");
    const auto fields = split_csv_line(lines[1]);
    if (fields.size() < 6) throw std::runtime_error(path.string() + ": short bias row");
    OverallBiasRow row;
    row.scenario = std::string(fields[0]);
    row.true_mean = parse_double(fields[1], path.string());
    row.sample_mean = parse_double(fields[2], path.string());
    row.vbpbb_mean = parse_double(fields[3], path.string());
    row.true_bias = parse_double(fields[4], path.string());
    row.estimated_bias = parse_double(fields[5], path.string());
    return row;
}

inline void write_bias_table_csv(const std::filesystem::path& path, std::span<const OverallBiasRow> rows) {
    std::string out = std::string(overall_bias_header()) + "\n";
    for (const auto& row : rows) out += overall_bias_row_to_csv(row);
    atomic_write_text(path, out);
}

inline void write_bias_periodic_csv(const std::filesystem::path& path, const BiasReport& report) {
    std::string out = "k,true_ref_bias,sample_ref_bias\n";
    for (std::size_t k = 0; k < report.periodic_true.size(); ++k) {
        out += std::to_string(k + 1);
        out += ',';
        out += format_double(report.periodic_true[k]);
        out += ',';
        out += format_double(report.periodic_sample[k]);
        out += '\n';
    }
    atomic_write_text(path, out);
}

struct PeriodicBiasCsv {
    std::vector<double> true_ref;
    std::vector<double> sample_ref;
};

inline PeriodicBiasCsv read_bias_periodic_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::vector<std::string> storage;
    const auto lines = non_empty_lines(text, storage);
    if (lines.empty() || !lines.front().starts_with("k,true_ref_bias,sample_ref_bias"))
        throw std::runtime_error(path.string() + ": expected header 'k,true_ref_bias,sample_ref_bias'");
    PeriodicBiasCsv out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() < 3)
            throw std::runtime_error(path.string() + ": short row " + std::to_string(i + 1));
        out.true_ref.push_back(parse_double(fields[1], path.string()));
        out.sample_ref.push_back(parse_double(fields[2], path.string()));
    }
    return out;
}

inline void write_bias_pointwise_csv(const std::filesystem::path& path, const BiasReport& report) {
    std::string out = "t,true_ref_bias,sample_ref_bias\n";
    for (std::size_t i = 0; i < report.pointwise_true.length(); ++i) {
        out += std::to_string(report.pointwise_true.time_at(i));
        out += ',';
        out += format_double(report.pointwise_true.values[i]);
        out += ',';
        out += format_double(report.pointwise_sample.values[i]);
        out += '\n';
    }
    atomic_write_text(path, out);
}

// -------------------------------------------------------------- ensemble i/o

/// Matrix dump: two header lines (`B,T,P,seed,start_index` and its values),
/// then B rows of T comma-separated values, row-major.
inline void write_ensemble_csv(const std::filesystem::path& path, const BootstrapEnsemble& ens) {
    std::string out = "B,T,P,seed,start_index\n";
    out += std::to_string(ens.replicates) + "," + std::to_string(ens.length) + "," +
           std::to_string(ens.block_length) + "," + std::to_string(ens.seed) + "," +
           std::to_string(ens.start_index) + "\n";
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto row = ens.row(b);
        for (std::size_t t = 0; t < row.size(); ++t) {
            if (t) out += ',';
            out += format_double(row[t]);
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

inline BootstrapEnsemble read_ensemble_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    std::vector<std::string> storage;
    const auto lines = non_empty_lines(text, storage);
    if (lines.size() < 2 || !lines.front().starts_with("B,T,P,seed"))
        throw std::runtime_error(path.string() + ": expected ensemble header 'B,T,P,seed,start_index'");
    const auto header = split_csv_line(lines[1]);
    if (header.size() < 5) throw std::runtime_error(path.string() + ": short ensemble header");
    BootstrapEnsemble ens;
    ens.replicates = static_cast<std::size_t>(parse_int(header[0], path.string()));
    ens.length = static_cast<std::size_t>(parse_int(header[1], path.string()));
    ens.block_length = parse_int(header[2], path.string());
    ens.seed = static_cast<std::uint64_t>(parse_int(header[3], path.string()));
    ens.start_index = parse_int(header[4], path.string());
    if (lines.size() != 2 + ens.replicates)
        throw std::runtime_error(path.string() + ": row count does not match header");
    ens.data.reserve(ens.replicates * ens.length);
    for (std::size_t b = 0; b < ens.replicates; ++b) {
        const auto fields = split_csv_line(lines[2 + b]);
        if (fields.size() != ens.length)
            throw std::runtime_error(path.string() + ": row " + std::to_string(b) + " has wrong width");
        for (const auto& f : fields) ens.data.push_back(parse_double(f, path.string()));
    }
    return ens;
}

/// Binary dump: magic "VBPBENS1", then B, T, P, seed, start_index as 64-bit
/// little-endian integers, then B*T doubles row-major (native byte order).
inline void write_ensemble_binary(const std::filesystem::path& path, const BootstrapEnsemble& ens) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write("VBPBENS1", 8);
        const std::uint64_t header[5] = {ens.replicates, ens.length,
                                         static_cast<std::uint64_t>(ens.block_length), ens.seed,
                                         static_cast<std::uint64_t>(ens.start_index)};
        out.write(reinterpret_cast<const char*>(header), sizeof header);
        out.write(reinterpret_cast<const char*>(ens.data.data()),
                  static_cast<std::streamsize>(ens.data.size() * sizeof(double)));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline BootstrapEnsemble read_ensemble_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string_view(magic, 8) != "VBPBENS1")
        throw std::runtime_error(path.string() + ": not an ensemble dump");
    std::uint64_t header[5];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (!in) throw std::runtime_error(path.string() + ": truncated header");
    BootstrapEnsemble ens;
    ens.replicates = header[0];
    ens.length = header[1];
    ens.block_length = static_cast<std::int64_t>(header[2]);
    ens.seed = header[3];
    ens.start_index = static_cast<std::int64_t>(header[4]);
    ens.data.resize(ens.replicates * ens.length);
    in.read(reinterpret_cast<char*>(ens.data.data()),
            static_cast<std::streamsize>(ens.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated matrix");
    return ens;
}

}  // namespace vbpbb
