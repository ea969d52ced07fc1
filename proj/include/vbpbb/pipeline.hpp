#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "vbpbb/bias.hpp"
#include "vbpbb/csv.hpp"
#include "vbpbb/resample.hpp"
#include "vbpbb/simulate.hpp"
#include "vbpbb/spectral.hpp"
#include "vbpbb/svg_plot.hpp"
#include "vbpbb/time_series.hpp"

namespace vbpbb {

/// Configuration/schema problem; carries the offending field path
/// (e.g. "bootstrap.B"). Distinct from numeric failures, which surface as
/// std::invalid_argument / std::out_of_range.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Ask the pipeline to detect filter targets from the periodogram instead of
/// specifying them explicitly.
struct FilterAuto {
    std::size_t top_n = 1;
};

struct RunConfig {
    std::string scenario_id = "custom";
    ScenarioConfig scenario;
    std::variant<std::vector<KzftParams>, FilterAuto> filter;

    struct Bootstrap {
        std::size_t replicates = 1000;  ///< B
        double level = 0.95;
        BandMode band_mode = BandMode::pointwise_ensemble;
        std::optional<std::int64_t> block_length;
    } bootstrap;

    struct Output {
        std::string directory = "out";
        bool csv = true;
        bool svg = true;
        std::vector<std::pair<std::int64_t, std::int64_t>> plot_windows;
        bool dump_ensemble = false;
    } output;

    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Run configurations reproducing the three study scenarios end to end:
/// filter (f = 1/25, m = 251, k = 1), B = 1000 replicates, 95% band over the
/// raw replicate values. Plot windows: first 1000 points, except the event
/// scenario which frames the affected interval [1000, 2000].
inline RunConfig preset_run_config(const std::string& name, std::uint64_t seed) {
    RunConfig cfg;
    cfg.scenario_id = name;
    cfg.scenario = scenario_preset(name, seed);
    cfg.filter = std::vector<KzftParams>{KzftParams{1.0 / 25.0, 251, 1}};
    cfg.bootstrap = {};
    cfg.output.plot_windows = name == "event"
                                  ? std::vector<std::pair<std::int64_t, std::int64_t>>{{1000, 2000}}
                                  : std::vector<std::pair<std::int64_t, std::int64_t>>{{1, 1000}};
    cfg.seed = seed;
    return cfg;
}

inline void set_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.scenario.seed = seed;
}

// ------------------------------------------------------------- json parsing

namespace cfg_detail {

using nlohmann::json;

inline std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& obj, const char* key, const std::string& base) {
    if (!obj.is_object()) throw ConfigError(base, "must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(base, key), "is required");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "must be a number");
    return v.get<double>();
}

inline std::int64_t as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "must be an integer");
    return v.get<std::int64_t>();
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "must be a string");
    return v.get<std::string>();
}

inline NoiseSpec parse_noise(const json& j, const std::string& path) {
    NoiseSpec spec;
    if (auto it = j.find("combine"); it != j.end()) {
        const std::string mode = as_string(*it, join(path, "combine"));
        if (mode == "coefficient_sum")
            spec.combine = NoiseCombine::coefficient_sum;
        else if (mode == "probabilistic_mixture")
            spec.combine = NoiseCombine::probabilistic_mixture;
        else
            throw ConfigError(join(path, "combine"),
                              "must be 'coefficient_sum' or 'probabilistic_mixture'");
    }
    const json& terms = require(j, "terms", path);
    if (!terms.is_array()) throw ConfigError(join(path, "terms"), "must be an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tpath = join(path, "terms[" + std::to_string(i) + "]");
        const json& tj = terms[i];
        NoiseTerm term;
        term.coefficient = as_number(require(tj, "coefficient", tpath), join(tpath, "coefficient"));
        const json& dj = require(tj, "distribution", tpath);
        const std::string dpath = join(tpath, "distribution");
        const std::string type = as_string(require(dj, "type", dpath), join(dpath, "type"));
        if (type == "normal") {
            Normal n;
            if (auto it = dj.find("mean"); it != dj.end()) n.mean = as_number(*it, join(dpath, "mean"));
            n.sd = as_number(require(dj, "sd", dpath), join(dpath, "sd"));
            term.distribution = n;
        } else if (type == "gamma_shifted") {
            GammaShifted g;
            g.shape = as_number(require(dj, "shape", dpath), join(dpath, "shape"));
            g.scale = as_number(require(dj, "scale", dpath), join(dpath, "scale"));
            if (auto it = dj.find("offset"); it != dj.end())
                g.offset = as_number(*it, join(dpath, "offset"));
            term.distribution = g;
        } else {
            throw ConfigError(join(dpath, "type"), "must be 'normal' or 'gamma_shifted'");
        }
        spec.terms.push_back(term);
    }
    return spec;
}

inline ScenarioConfig parse_scenario_object(const json& j, const std::string& path,
                                            std::uint64_t default_seed) {
    ScenarioConfig cfg;
    cfg.length = as_int(require(j, "length", path), join(path, "length"));
    const json& comps = require(j, "components", path);
    if (!comps.is_array()) throw ConfigError(join(path, "components"), "must be an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cpath = join(path, "components[" + std::to_string(i) + "]");
        const json& cj = comps[i];
        SineComponent c;
        c.amplitude = as_number(require(cj, "amplitude", cpath), join(cpath, "amplitude"));
        c.period = as_number(require(cj, "period", cpath), join(cpath, "period"));
        if (auto it = cj.find("phase"); it != cj.end()) c.phase = as_number(*it, join(cpath, "phase"));
        cfg.components.push_back(c);
    }
    if (auto it = j.find("noise"); it != j.end() && !it->is_null())
        cfg.noise = parse_noise(*it, join(path, "noise"));
    if (auto it = j.find("event"); it != j.end() && !it->is_null()) {
        const std::string epath = join(path, "event");
        EventSpec e;
        e.start = as_int(require(*it, "start", epath), join(epath, "start"));
        e.end = as_int(require(*it, "end", epath), join(epath, "end"));
        e.shift = as_number(require(*it, "shift", epath), join(epath, "shift"));
        cfg.event = e;
    }
    if (auto it = j.find("trend"); it != j.end() && !it->is_null()) {
        const std::string tpath = join(path, "trend");
        TrendSpec t;
        t.slope = as_number(require(*it, "slope", tpath), join(tpath, "slope"));
        cfg.trend = t;
    }
    cfg.seed = default_seed;
    if (auto it = j.find("seed"); it != j.end())
        cfg.seed = static_cast<std::uint64_t>(as_int(*it, join(path, "seed")));
    return cfg;
}

inline std::vector<KzftParams> parse_filter_list(const json& j, const std::string& path) {
    std::vector<KzftParams> filters;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string fpath = path + "[" + std::to_string(i) + "]";
        const json& fj = j[i];
        if (!fj.is_object()) throw ConfigError(fpath, "must be an object");
        KzftParams p;
        const bool has_f = fj.contains("f");
        const bool has_period = fj.contains("period");
        if (has_f == has_period)
            throw ConfigError(fpath, "give exactly one of 'f' or 'period'");
        double period;
        if (has_f) {
            p.frequency = as_number(fj["f"], join(fpath, "f"));
            if (!(p.frequency > 0.0)) throw ConfigError(join(fpath, "f"), "must be positive");
            period = 1.0 / p.frequency;
        } else {
            period = as_number(fj["period"], join(fpath, "period"));
            if (!(period > 0.0)) throw ConfigError(join(fpath, "period"), "must be positive");
            p.frequency = 1.0 / period;
        }
        p.window = fj.contains("m") ? as_int(fj["m"], join(fpath, "m"))
                                    : round_to_odd(10.0 * period + 1.0);
        if (fj.contains("k")) p.iterations = as_int(fj["k"], join(fpath, "k"));
        filters.push_back(p);
    }
    if (filters.empty()) throw ConfigError(path, "must name at least one filter target");
    return filters;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["length"] = cfg.length;
    j["components"] = json::array();
    for (const auto& c : cfg.components)
        j["components"].push_back({{"amplitude", c.amplitude}, {"period", c.period}, {"phase", c.phase}});
    if (cfg.noise) {
        json terms = json::array();
        for (const auto& term : cfg.noise->terms) {
            json dist;
            std::visit(
                [&dist](const auto& d) {
                    using D = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<D, Normal>)
                        dist = {{"type", "normal"}, {"mean", d.mean}, {"sd", d.sd}};
                    else
                        dist = {{"type", "gamma_shifted"},
                                {"shape", d.shape},
                                {"scale", d.scale},
                                {"offset", d.offset}};
                },
                term.distribution);
            terms.push_back({{"coefficient", term.coefficient}, {"distribution", dist}});
        }
        j["noise"] = {{"combine", cfg.noise->combine == NoiseCombine::coefficient_sum
                                      ? "coefficient_sum"
                                      : "probabilistic_mixture"},
                      {"terms", terms}};
    }
    if (cfg.event)
        j["event"] = {{"start", cfg.event->start}, {"end", cfg.event->end}, {"shift", cfg.event->shift}};
    if (cfg.trend) j["trend"] = {{"slope", cfg.trend->slope}};
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace cfg_detail

/// Canonical JSON echo of a run configuration: presets expanded, defaults
/// materialized. Reparses to an equivalent configuration.
inline std::string run_config_to_json(const RunConfig& cfg) {
    using cfg_detail::json;
    json j;
    j["scenario_id"] = cfg.scenario_id;
    j["scenario"] = cfg_detail::scenario_to_json(cfg.scenario);
    if (const auto* filters = std::get_if<std::vector<KzftParams>>(&cfg.filter)) {
        json arr = json::array();
        for (const auto& p : *filters)
            arr.push_back({{"f", p.frequency}, {"m", p.window}, {"k", p.iterations}});
        j["filter"] = arr;
    } else {
        j["filter"] = {{"auto", {{"top_n", std::get<FilterAuto>(cfg.filter).top_n}}}};
    }
    j["bootstrap"] = {{"B", cfg.bootstrap.replicates},
                      {"level", cfg.bootstrap.level},
                      {"band_mode", cfg.bootstrap.band_mode == BandMode::periodic_mean
                                        ? "periodic_mean"
                                        : "pointwise_ensemble"}};
    if (cfg.bootstrap.block_length) j["bootstrap"]["block_length"] = *cfg.bootstrap.block_length;
    json windows = json::array();
    for (const auto& [from, to] : cfg.output.plot_windows) windows.push_back({from, to});
    json formats = json::array();
    if (cfg.output.csv) formats.push_back("csv");
    if (cfg.output.svg) formats.push_back("svg");
    j["output"] = {{"directory", cfg.output.directory},
                   {"formats", formats},
                   {"plot_windows", windows},
                   {"dump_ensemble", cfg.output.dump_ensemble}};
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

/// Schema-level validation; throws ConfigError naming the offending field.
inline void validate_run_config(const RunConfig& cfg) {
    try {
        validate(cfg.scenario);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("scenario", e.what());
    }
    if (const auto* filters = std::get_if<std::vector<KzftParams>>(&cfg.filter)) {
        if (filters->empty()) throw ConfigError("filter", "must name at least one target");
        for (std::size_t i = 0; i < filters->size(); ++i) {
            try {
                validate((*filters)[i]);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("filter[" + std::to_string(i) + "]", e.what());
            }
        }
    } else if (std::get<FilterAuto>(cfg.filter).top_n < 1) {
        throw ConfigError("filter.auto.top_n", "must be >= 1");
    }
    if (cfg.bootstrap.replicates < 1) throw ConfigError("bootstrap.B", "must be >= 1");
    if (!(cfg.bootstrap.level > 0.0) || !(cfg.bootstrap.level < 1.0))
        throw ConfigError("bootstrap.level", "must lie in (0, 1)");
    if (cfg.bootstrap.block_length && *cfg.bootstrap.block_length < 1)
        throw ConfigError("bootstrap.block_length", "must be >= 1");
    if (cfg.output.directory.empty()) throw ConfigError("output.directory", "must not be empty");
    for (std::size_t i = 0; i < cfg.output.plot_windows.size(); ++i) {
        const auto& [from, to] = cfg.output.plot_windows[i];
        if (from > to)
            throw ConfigError("output.plot_windows[" + std::to_string(i) + "]",
                              "window start must not exceed end");
    }
}

/// Parses a run configuration from JSON text. Presets may be named via
/// "scenario": "original" | "event" | "trend"; explicit objects follow the
/// schema documented in the README. Throws ConfigError with the field path
/// (and, for malformed JSON, the line).
inline RunConfig parse_run_config(const std::string& text) {
    using cfg_detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("", "JSON parse error at line " + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("", "top level must be a JSON object");

    RunConfig cfg;
    cfg.seed = 0;
    if (auto it = j.find("seed"); it != j.end())
        cfg.seed = static_cast<std::uint64_t>(cfg_detail::as_int(*it, "seed"));
    if (auto it = j.find("threads"); it != j.end()) {
        const std::int64_t th = cfg_detail::as_int(*it, "threads");
        if (th < 0) throw ConfigError("threads", "must be >= 0 (0 = auto)");
        cfg.threads = static_cast<unsigned>(th);
    }

    const json& scenario = cfg_detail::require(j, "scenario", "");
    if (scenario.is_string()) {
        const std::string name = scenario.get<std::string>();
        try {
            cfg.scenario = scenario_preset(name, cfg.seed);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("scenario", e.what());
        }
        cfg.scenario_id = name;
    } else if (scenario.is_object()) {
        cfg.scenario = cfg_detail::parse_scenario_object(scenario, "scenario", cfg.seed);
        cfg.scenario_id = "custom";
    } else {
        throw ConfigError("scenario", "must be a preset name or an object");
    }
    if (auto it = j.find("scenario_id"); it != j.end())
        cfg.scenario_id = cfg_detail::as_string(*it, "scenario_id");

    if (auto it = j.find("filter"); it != j.end()) {
        if (it->is_array()) {
            cfg.filter = cfg_detail::parse_filter_list(*it, "filter");
        } else if (it->is_object() && it->contains("auto")) {
            FilterAuto fa;
            const json& aj = (*it)["auto"];
            if (aj.is_object() && aj.contains("top_n"))
                fa.top_n = static_cast<std::size_t>(cfg_detail::as_int(aj["top_n"], "filter.auto.top_n"));
            cfg.filter = fa;
        } else {
            throw ConfigError("filter", "must be an array of targets or {\"auto\": {...}}");
        }
    } else {
        cfg.filter = FilterAuto{};
    }

    if (auto it = j.find("bootstrap"); it != j.end()) {
        const json& bj = *it;
        if (!bj.is_object()) throw ConfigError("bootstrap", "must be an object");
        if (bj.contains("B")) {
            const std::int64_t b = cfg_detail::as_int(bj["B"], "bootstrap.B");
            if (b < 1) throw ConfigError("bootstrap.B", "must be >= 1");
            cfg.bootstrap.replicates = static_cast<std::size_t>(b);
        }
        if (bj.contains("level"))
            cfg.bootstrap.level = cfg_detail::as_number(bj["level"], "bootstrap.level");
        if (bj.contains("band_mode")) {
            const std::string mode = cfg_detail::as_string(bj["band_mode"], "bootstrap.band_mode");
            if (mode == "periodic_mean")
                cfg.bootstrap.band_mode = BandMode::periodic_mean;
            else if (mode == "pointwise_ensemble")
                cfg.bootstrap.band_mode = BandMode::pointwise_ensemble;
            else
                throw ConfigError("bootstrap.band_mode",
                                  "must be 'periodic_mean' or 'pointwise_ensemble'");
        }
        if (bj.contains("block_length"))
            cfg.bootstrap.block_length = cfg_detail::as_int(bj["block_length"], "bootstrap.block_length");
    }

    if (auto it = j.find("output"); it != j.end()) {
        const json& oj = *it;
        if (!oj.is_object()) throw ConfigError("output", "must be an object");
        if (oj.contains("directory"))
            cfg.output.directory = cfg_detail::as_string(oj["directory"], "output.directory");
        if (oj.contains("formats")) {
            if (!oj["formats"].is_array()) throw ConfigError("output.formats", "must be an array");
            cfg.output.csv = cfg.output.svg = false;
            for (const auto& f : oj["formats"]) {
                const std::string fmt = cfg_detail::as_string(f, "output.formats");
                if (fmt == "csv")
                    cfg.output.csv = true;
                else if (fmt == "svg")
                    cfg.output.svg = true;
                else
                    throw ConfigError("output.formats", "unsupported format '" + fmt + "'");
            }
        }
        if (oj.contains("plot_windows")) {
            const json& wj = oj["plot_windows"];
            if (!wj.is_array()) throw ConfigError("output.plot_windows", "must be an array");
            for (std::size_t i = 0; i < wj.size(); ++i) {
                const std::string wpath = "output.plot_windows[" + std::to_string(i) + "]";
                if (!wj[i].is_array() || wj[i].size() != 2)
                    throw ConfigError(wpath, "must be a [from, to] pair");
                cfg.output.plot_windows.emplace_back(cfg_detail::as_int(wj[i][0], wpath),
                                                     cfg_detail::as_int(wj[i][1], wpath));
            }
        }
        if (oj.contains("dump_ensemble")) {
            if (!oj["dump_ensemble"].is_boolean())
                throw ConfigError("output.dump_ensemble", "must be a boolean");
            cfg.output.dump_ensemble = oj["dump_ensemble"].get<bool>();
        }
    }

    validate_run_config(cfg);
    return cfg;
}

// -------------------------------------------------------------------- run()

struct ArtifactEntry {
    std::string kind;
    std::string path;  ///< relative to the output directory
};

struct RunOutput {
    std::filesystem::path directory;
    std::filesystem::path manifest_path;
    std::vector<ArtifactEntry> artifacts;
    std::vector<std::string> notes;
    std::string scenario_id;
    ScenarioData scenario;
    VbpbbResult result;
    BiasReport report;
};

/// Full pipeline into cfg.output.directory: scenario series CSVs, component
/// and PC-sum CSVs, band CSV, ensemble summary, bias report CSVs, plots per
/// requested window, and a manifest listing every artifact with the config
/// echo and seed. Rerunning with an identical config (same seed, any thread
/// count) reproduces every artifact byte for byte.
inline RunOutput run(const RunConfig& cfg) {
    validate_run_config(cfg);

    RunOutput out;
    out.scenario_id = cfg.scenario_id;
    out.directory = cfg.output.directory;
    std::filesystem::create_directories(out.directory);

    out.scenario = build_scenario(cfg.scenario);
    for (const auto& w : out.scenario.warnings) out.notes.push_back(w);

    std::vector<KzftParams> targets;
    if (const auto* filters = std::get_if<std::vector<KzftParams>>(&cfg.filter)) {
        targets = *filters;
    } else {
        const auto spectrum = periodogram(out.scenario.observed);
        const auto detected = detect_periods(spectrum, std::get<FilterAuto>(cfg.filter).top_n);
        for (const auto& d : detected)
            targets.push_back(KzftParams{d.frequency, round_to_odd(10.0 * d.period + 1.0), 1});
        out.notes.push_back("filter targets detected from the periodogram");
    }

    // Plot windows must sit inside the generated series.
    for (std::size_t i = 0; i < cfg.output.plot_windows.size(); ++i) {
        const auto& [from, to] = cfg.output.plot_windows[i];
        if (from < 1 || to > cfg.scenario.length)
            throw std::out_of_range("output.plot_windows[" + std::to_string(i) +
                                    "]: window outside [1, " + std::to_string(cfg.scenario.length) +
                                    "]");
    }

    VbpbbOptions options;
    options.band_mode = cfg.bootstrap.band_mode;
    options.block_length = cfg.bootstrap.block_length;
    options.threads = cfg.threads;
    out.result = vbpbb_run(out.scenario.observed, targets, cfg.bootstrap.replicates, cfg.seed,
                           cfg.bootstrap.level, options);
    for (const auto& w : out.result.ensemble.warnings) out.notes.push_back(w);
    out.notes.push_back("periodic means normalized by N_k*B");

    out.report = make_bias_report(out.scenario, out.result, cfg.scenario_id, cfg.threads);

    auto emit = [&out](const std::string& kind, const std::string& rel) {
        out.artifacts.push_back({kind, rel});
        return out.directory / rel;
    };

    if (cfg.output.csv) {
        write_series_csv(emit("signal", "signal.csv"), out.scenario.baseline);
        write_series_csv(emit("truth", "truth.csv"), out.scenario.truth);
        write_series_csv(emit("observed", "observed.csv"), out.scenario.observed);
        for (std::size_t i = 0; i < out.result.components.size(); ++i)
            write_pc_csv(emit("pc_component", "pc_component_" + std::to_string(i + 1) + ".csv"),
                         out.result.components[i]);
        write_series_csv(emit("pc_sum", "pc_sum.csv"), out.result.pc_sum);
        write_band_csv(emit("band", "band.csv"), out.result.band);

        std::string summary = "B,T,P,seed,blocks,remainder,grand_mean\n";
        const auto& ens = out.result.ensemble;
        summary += std::to_string(ens.replicates) + "," + std::to_string(ens.length) + "," +
                   std::to_string(ens.block_length) + "," + std::to_string(ens.seed) + "," +
                   std::to_string(static_cast<std::int64_t>(ens.length) / ens.block_length) + "," +
                   std::to_string(static_cast<std::int64_t>(ens.length) % ens.block_length) + "," +
                   format_double(out.report.overall.vbpbb_mean) + "\n";
        atomic_write_text(emit("ensemble_summary", "ensemble_summary.csv"), summary);

        write_bias_overall_csv(emit("bias_overall", "bias_overall.csv"), out.report);
        write_bias_periodic_csv(emit("bias_periodic", "bias_periodic.csv"), out.report);
        write_bias_pointwise_csv(emit("bias_pointwise", "bias_pointwise.csv"), out.report);
        if (cfg.output.dump_ensemble)
            write_ensemble_csv(emit("ensemble", "ensemble.csv"), out.result.ensemble);
    }

    if (cfg.output.svg) {
        for (const auto& [from, to] : cfg.output.plot_windows) {
            const std::string rel =
                "series_" + std::to_string(from) + "_" + std::to_string(to) + ".svg";
            write_series_band_svg(emit("series_plot", rel),
                                  cfg.scenario_id + ": observed, truth, band", from, to,
                                  &out.scenario.observed, &out.scenario.truth, &out.result.band);
        }
        const std::vector<std::pair<std::string, std::vector<double>>> curves = {
            {"true reference", out.report.periodic_true},
            {"sample reference", out.report.periodic_sample}};
        write_periodic_bias_svg(emit("bias_plot", "bias_periodic.svg"),
                                cfg.scenario_id + ": per-phase mean bias", curves);
    }

    using cfg_detail::json;
    json manifest;
    manifest["schema"] = "vbpbb-manifest/1";
    manifest["scenario_id"] = cfg.scenario_id;
    manifest["seed"] = cfg.seed;
    manifest["T"] = cfg.scenario.length;
    manifest["P"] = out.result.ensemble.block_length;
    manifest["B"] = out.result.ensemble.replicates;
    manifest["config"] = json::parse(run_config_to_json(cfg));
    manifest["notes"] = out.notes;
    json artifacts = json::array();
    for (const auto& a : out.artifacts) artifacts.push_back({{"kind", a.kind}, {"path", a.path}});
    manifest["artifacts"] = artifacts;
    out.manifest_path = out.directory / "manifest.json";
    atomic_write_text(out.manifest_path, manifest.dump(2) + "\n");
    return out;
}

// ---------------------------------------------------------------- manifests

struct ManifestInfo {
    std::filesystem::path directory;
    std::string scenario_id;
    std::int64_t series_length = 0;  ///< T
    std::int64_t block_length = 0;   ///< P
    std::size_t replicates = 0;      ///< B
    std::uint64_t seed = 0;
    std::vector<ArtifactEntry> artifacts;

    std::optional<std::filesystem::path> find(const std::string& kind) const {
        for (const auto& a : artifacts)
            if (a.kind == kind) return directory / a.path;
        return std::nullopt;
    }
};

inline ManifestInfo read_manifest(const std::filesystem::path& path) {
    using cfg_detail::json;
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    ManifestInfo info;
    info.directory = path.parent_path();
    info.scenario_id = j.value("scenario_id", std::string("unknown"));
    info.series_length = j.value("T", std::int64_t{0});
    info.block_length = j.value("P", std::int64_t{0});
    info.replicates = j.value("B", std::size_t{0});
    info.seed = j.value("seed", std::uint64_t{0});
    if (auto it = j.find("artifacts"); it != j.end() && it->is_array())
        for (const auto& a : *it)
            info.artifacts.push_back({a.value("kind", std::string()), a.value("path", std::string())});
    return info;
}

/// Combines the overall-bias rows of several run manifests into one table
/// (one row per manifest, duplicates kept). A T or P mismatch across runs is
/// reported as a warning, not an error.
inline std::vector<OverallBiasRow> compare_scenarios(std::span<const std::filesystem::path> manifests,
                                                std::vector<std::string>* warnings = nullptr) {
    if (manifests.empty()) throw std::invalid_argument("compare_scenarios: need at least one manifest");
    std::vector<OverallBiasRow> rows;
    std::optional<std::pair<std::int64_t, std::int64_t>> shape;
    for (const auto& path : manifests) {
        const ManifestInfo info = read_manifest(path);
        const auto bias_csv = info.find("bias_overall");
        if (!bias_csv)
            throw std::runtime_error(path.string() + ": manifest lists no bias_overall artifact");
        rows.push_back(read_bias_overall_csv(*bias_csv));
        if (shape && warnings &&
            (shape->first != info.series_length || shape->second != info.block_length))
            warnings->push_back("manifest " + path.string() +
                                " has a different T or P than earlier runs; rows may not be comparable");
        if (!shape) shape = {info.series_length, info.block_length};
    }
    return rows;
}

}  // namespace vbpbb
