// vbpbb command-line front end.
//
// Verbs:
//   simulate  scenario -> series CSVs (signal, truth, observed)
//   analyze   series CSV -> spectrum and detected-period CSVs
//   run       full pipeline -> CSV/plot artifacts + manifest
//   report    run manifests -> combined overall-bias table CSV
//   plot      run manifests -> windowed series plots / combined bias plot
//
// Exit codes: 0 success, 2 configuration/schema error (message names the
// offending field), 3 numeric or range failure (message names the parameter).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vbpbb/vbpbb.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<unsigned> threads;
};

vbpbb::RunConfig load_run_config(const CommonArgs& args) {
    vbpbb::RunConfig cfg;
    if (!args.config_path.empty() && !args.preset.empty())
        throw vbpbb::ConfigError("", "give either --config or --preset, not both");
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw vbpbb::ConfigError("", "cannot read config file: " + args.config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        cfg = vbpbb::parse_run_config(text);
    } else if (!args.preset.empty()) {
        cfg = vbpbb::preset_run_config(args.preset, args.seed.value_or(0));
    } else {
        throw vbpbb::ConfigError("", "one of --config or --preset is required");
    }
    if (args.seed) vbpbb::set_seed(cfg, *args.seed);
    if (!args.out_dir.empty()) cfg.output.directory = args.out_dir;
    if (args.threads) cfg.threads = *args.threads;
    return cfg;
}

void write_small_manifest(const fs::path& dir, const std::string& scenario_id, std::uint64_t seed,
                          std::int64_t length, const std::vector<vbpbb::ArtifactEntry>& artifacts) {
    nlohmann::json manifest;
    manifest["schema"] = "vbpbb-manifest/1";
    manifest["scenario_id"] = scenario_id;
    manifest["seed"] = seed;
    manifest["T"] = length;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : artifacts) arr.push_back({{"kind", a.kind}, {"path", a.path}});
    manifest["artifacts"] = arr;
    vbpbb::atomic_write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_simulate(const CommonArgs& args) {
    vbpbb::RunConfig cfg = load_run_config(args);
    const auto data = vbpbb::build_scenario(cfg.scenario);
    const fs::path dir = cfg.output.directory;
    fs::create_directories(dir);
    std::vector<vbpbb::ArtifactEntry> artifacts = {
        {"signal", "signal.csv"}, {"truth", "truth.csv"}, {"observed", "observed.csv"}};
    vbpbb::write_series_csv(dir / "signal.csv", data.baseline);
    vbpbb::write_series_csv(dir / "truth.csv", data.truth);
    vbpbb::write_series_csv(dir / "observed.csv", data.observed);
    write_small_manifest(dir, cfg.scenario_id, cfg.scenario.seed, cfg.scenario.length, artifacts);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << artifacts.size() << " series to " << dir.string() << "\n";
    return 0;
}

int cmd_analyze(const std::string& series_path, std::size_t top_n, const std::string& out_dir) {
    const auto series = vbpbb::read_series_csv(series_path);
    const auto spectrum = vbpbb::periodogram(series);
    const auto periods = vbpbb::detect_periods(spectrum, std::min(top_n, spectrum.bins.size()));
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    vbpbb::write_spectrum_csv(dir / "spectrum.csv", spectrum);
    vbpbb::write_periods_csv(dir / "periods.csv", periods);
    write_small_manifest(dir, "analyze", 0, static_cast<std::int64_t>(series.length()),
                         {{"spectrum", "spectrum.csv"}, {"periods", "periods.csv"}});
    for (const auto& p : periods)
        std::cout << "period " << p.period << " (frequency " << p.frequency << ", power "
                  << p.power << (p.degenerate ? ", degenerate)" : ")") << "\n";
    return 0;
}

int cmd_run(const CommonArgs& args) {
    const vbpbb::RunConfig cfg = load_run_config(args);
    const auto out = vbpbb::run(cfg);
    for (const auto& n : out.notes) std::cerr << "note: " << n << "\n";
    std::cout << "scenario " << out.scenario_id << ": estimated overall mean bias "
              << vbpbb::format_double(out.report.overall.estimated_bias) << "\n";
    std::cout << "wrote " << out.artifacts.size() << " artifacts to " << out.directory.string()
              << " (manifest: " << out.manifest_path.string() << ")\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& manifest_paths, const std::string& out_file) {
    std::vector<fs::path> paths(manifest_paths.begin(), manifest_paths.end());
    std::vector<std::string> warnings;
    const auto rows = vbpbb::compare_scenarios(paths, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    vbpbb::write_bias_table_csv(out_file, rows);
    std::cout << "wrote " << rows.size() << " row(s) to " << out_file << "\n";
    return 0;
}

int cmd_plot(const std::vector<std::string>& manifest_paths,
             const std::vector<std::int64_t>& window, bool bias_plot, const std::string& out_dir) {
    if (manifest_paths.empty()) throw vbpbb::ConfigError("", "--manifest is required");
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    int written = 0;

    if (!window.empty()) {
        const std::int64_t from = window[0], to = window[1];
        for (const auto& mpath : manifest_paths) {
            const auto info = vbpbb::read_manifest(mpath);
            const auto observed_csv = info.find("observed");
            const auto truth_csv = info.find("truth");
            const auto band_csv = info.find("band");
            std::optional<vbpbb::TimeSeries> observed, truth;
            std::optional<vbpbb::BandEstimate> band;
            if (observed_csv) observed = vbpbb::read_series_csv(*observed_csv);
            if (truth_csv) truth = vbpbb::read_series_csv(*truth_csv);
            if (band_csv) band = vbpbb::read_band_csv(*band_csv);
            const fs::path file = dir / (info.scenario_id + "_series_" + std::to_string(from) +
                                         "_" + std::to_string(to) + ".svg");
            vbpbb::write_series_band_svg(file, info.scenario_id + ": observed, truth, band", from,
                                         to, observed ? &*observed : nullptr,
                                         truth ? &*truth : nullptr, band ? &*band : nullptr);
            ++written;
        }
    }

    if (bias_plot) {
        std::vector<std::pair<std::string, std::vector<double>>> true_curves, sample_curves;
        for (const auto& mpath : manifest_paths) {
            const auto info = vbpbb::read_manifest(mpath);
            const auto bias_csv = info.find("bias_periodic");
            if (!bias_csv)
                throw std::runtime_error(mpath + ": manifest lists no bias_periodic artifact");
            const auto curves = vbpbb::read_bias_periodic_csv(*bias_csv);
            true_curves.emplace_back(info.scenario_id, curves.true_ref);
            sample_curves.emplace_back(info.scenario_id, curves.sample_ref);
        }
        vbpbb::write_periodic_bias_svg(dir / "bias_periodic_true.svg",
                                       "per-phase bias, true reference", true_curves);
        vbpbb::write_periodic_bias_svg(dir / "bias_periodic_sample.svg",
                                       "per-phase bias, sample reference", sample_curves);
        written += 2;
    }

    if (written == 0)
        throw vbpbb::ConfigError("", "nothing to plot: give --window FROM TO and/or --bias");
    std::cout << "wrote " << written << " plot(s) to " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable Bandpass Periodic Block Bootstrap pipeline"};
    app.require_subcommand(1);

    CommonArgs sim_args, run_args;
    std::string analyze_series, analyze_out = "out";
    std::size_t analyze_top_n = 3;
    std::vector<std::string> report_manifests, plot_manifests;
    std::string report_out = "bias_table.csv", plot_out = "out";
    std::vector<std::int64_t> plot_window;
    bool plot_bias = false;

    auto add_common = [](CLI::App* cmd, CommonArgs& args) {
        cmd->add_option("--config", args.config_path, "JSON run configuration");
        cmd->add_option("--preset", args.preset, "scenario preset: original|event|trend");
        cmd->add_option("--seed", args.seed, "seed override (applies to scenario and bootstrap)");
        cmd->add_option("--out", args.out_dir, "output directory override");
        cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
    };

    auto* simulate = app.add_subcommand("simulate", "generate scenario series CSVs");
    add_common(simulate, sim_args);

    auto* analyze = app.add_subcommand("analyze", "periodogram and period detection for a series CSV");
    analyze->add_option("--series", analyze_series, "input CSV with header t,value")->required();
    analyze->add_option("--top-n", analyze_top_n, "number of detected periods to keep");
    analyze->add_option("--out", analyze_out, "output directory");

    auto* run_cmd = app.add_subcommand("run", "full VBPBB pipeline");
    add_common(run_cmd, run_args);

    auto* report = app.add_subcommand("report", "combine run manifests into a bias table CSV");
    report->add_option("--manifest", report_manifests, "manifest.json paths")->required();
    report->add_option("--out", report_out, "output CSV file");

    auto* plot = app.add_subcommand("plot", "render plots from run artifacts");
    plot->add_option("--manifest", plot_manifests, "manifest.json paths")->required();
    plot->add_option("--window", plot_window, "time window FROM TO")->expected(2);
    plot->add_flag("--bias", plot_bias, "combined per-phase bias plot across manifests");
    plot->add_option("--out", plot_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (analyze->parsed()) return cmd_analyze(analyze_series, analyze_top_n, analyze_out);
        if (run_cmd->parsed()) return cmd_run(run_args);
        if (report->parsed()) return cmd_report(report_manifests, report_out);
        if (plot->parsed()) return cmd_plot(plot_manifests, plot_window, plot_bias, plot_out);
    } catch (const vbpbb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 3;
    } catch (const std::out_of_range& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
