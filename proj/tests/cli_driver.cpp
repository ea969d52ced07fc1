// End-to-end checks against the installed CLI binary (path injected by CMake
// as VBPBB_CLI_PATH): exit codes, artifact layout, and byte-level determinism
// across thread counts.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vbpbb/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "  ok: " << what << "\n";
    } else {
        ++failures;
        std::cout << "  FAILED: " << what << "\n";
    }
}

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "cli_log.txt";
    const std::string command =
        std::string(VBPBB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    CliResult result;
    if (status == -1)
        result.exit_code = -1;
    else
        result.exit_code = WEXITSTATUS(status);
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    result.output = ss.str();
    return result;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_bytes(const fs::path& a, const fs::path& b) { return slurp(a) == slurp(b); }

}  // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "vbpbb_cli_tests";
    fs::remove_all(root);
    fs::create_directories(root);

    std::cout << "run: three presets, fixed seed\n";
    const fs::path dir_original = root / "original";
    const fs::path dir_event = root / "event";
    const fs::path dir_trend = root / "trend";
    for (const auto& [preset, dir] :
         {std::pair{"original", dir_original}, {"event", dir_event}, {"trend", dir_trend}}) {
        const auto res = run_cli(std::string("run --preset ") + preset + " --seed 7 --out " +
                                     dir.string() + " --threads 1",
                                 root);
        check(res.exit_code == 0, std::string("run --preset ") + preset + " exits 0");
        check(fs::exists(dir / "manifest.json"), std::string(preset) + " writes a manifest");
        check(fs::exists(dir / "bias_overall.csv"), std::string(preset) + " writes bias_overall.csv");
        check(fs::exists(dir / "band.csv"), std::string(preset) + " writes band.csv");
    }
    check(fs::exists(dir_event / "series_1000_2000.svg"),
          "event preset frames its plot window 1000..2000");

    std::cout << "run: byte-identical artifacts across --threads\n";
    const fs::path dir_threads = root / "original_t3";
    const auto res_threads = run_cli("run --preset original --seed 7 --out " + dir_threads.string() +
                                         " --threads 3",
                                     root);
    check(res_threads.exit_code == 0, "threaded rerun exits 0");
    {
        const auto manifest = vbpbb::read_manifest(dir_original / "manifest.json");
        bool all_same = !manifest.artifacts.empty();
        for (const auto& artifact : manifest.artifacts)
            all_same = all_same &&
                       same_bytes(dir_original / artifact.path, dir_threads / artifact.path);
        check(all_same, "every artifact matches byte for byte between --threads 1 and 3");
    }

    std::cout << "exit codes: schema vs numeric failures\n";
    {
        const fs::path bad_config = root / "bad_b.json";
        std::ofstream(bad_config) << R"({"scenario": "original", "bootstrap": {"B": 0}, "seed": 1})";
        const auto res = run_cli("run --config " + bad_config.string() + " --out " +
                                     (root / "bad_b_out").string(),
                                 root);
        check(res.exit_code == 2, "B = 0 exits 2");
        check(res.output.find("bootstrap.B") != std::string::npos,
              "B = 0 diagnostic names bootstrap.B");
    }
    {
        const fs::path bad_config = root / "bad_m.json";
        std::ofstream(bad_config) << R"({
          "scenario": {"length": 100, "components": [{"amplitude": 1, "period": 25}], "seed": 1},
          "filter": [{"period": 25, "m": 251, "k": 1}],
          "seed": 1})";
        const auto res = run_cli("run --config " + bad_config.string() + " --out " +
                                     (root / "bad_m_out").string(),
                                 root);
        check(res.exit_code == 3, "m > T exits 3");
        check(res.output.find("m") != std::string::npos, "m > T diagnostic names the parameter");
    }
    {
        const auto res = run_cli("run --preset original --seed 1 --out " +
                                     (root / "nowhere").string() + " --config " +
                                     (root / "bad_b.json").string(),
                                 root);
        check(res.exit_code == 2, "--preset plus --config exits 2");
    }

    std::cout << "simulate / analyze round trip\n";
    const fs::path sim_dir = root / "sim";
    {
        const auto res =
            run_cli("simulate --preset original --seed 11 --out " + sim_dir.string(), root);
        check(res.exit_code == 0, "simulate exits 0");
        for (const auto* name : {"signal.csv", "truth.csv", "observed.csv", "manifest.json"})
            check(fs::exists(sim_dir / name), std::string("simulate writes ") + name);
    }
    {
        const fs::path out = root / "analyze";
        const auto res = run_cli("analyze --series " + (sim_dir / "observed.csv").string() +
                                     " --top-n 3 --out " + out.string(),
                                 root);
        check(res.exit_code == 0, "analyze exits 0");
        check(fs::exists(out / "spectrum.csv"), "analyze writes spectrum.csv");
        check(fs::exists(out / "periods.csv"), "analyze writes periods.csv");
        check(res.output.find("period 25") != std::string::npos,
              "analyze detects the 25-sample period");
    }

    std::cout << "report / plot over manifests\n";
    {
        const fs::path table = root / "bias_table.csv";
        const auto res = run_cli("report --manifest " + (dir_original / "manifest.json").string() +
                                     " --manifest " + (dir_event / "manifest.json").string() +
                                     " --manifest " + (dir_trend / "manifest.json").string() +
                                     " --out " + table.string(),
                                 root);
        check(res.exit_code == 0, "report exits 0");
        const auto text = slurp(table);
        check(text.find("original,") != std::string::npos, "table lists the original row");
        check(text.find("event,") != std::string::npos, "table lists the event row");
        check(text.find("trend,") != std::string::npos, "table lists the trend row");
        // every combined row keeps the estimated overall bias under 1e-3
        std::istringstream rows(text);
        std::string line;
        std::getline(rows, line);  // header
        int bounded = 0;
        while (std::getline(rows, line)) {
            const auto last_comma = line.rfind(',');
            if (last_comma == std::string::npos) continue;
            const double est = std::strtod(line.c_str() + last_comma + 1, nullptr);
            if (std::abs(est) < 1e-3) ++bounded;
        }
        check(bounded == 3, "every row has |estimated overall bias| < 1e-3");
    }
    {
        const fs::path out = root / "plots";
        const auto res = run_cli("plot --manifest " + (dir_original / "manifest.json").string() +
                                     " --manifest " + (dir_event / "manifest.json").string() +
                                     " --manifest " + (dir_trend / "manifest.json").string() +
                                     " --window 1000 2000 --bias --out " + out.string(),
                                 root);
        check(res.exit_code == 0, "plot exits 0");
        check(fs::exists(out / "original_series_1000_2000.svg"), "plot writes the original window");
        check(fs::exists(out / "bias_periodic_true.svg"), "plot writes the combined bias figure");
        const auto svg = slurp(out / "bias_periodic_true.svg");
        check(svg.find("original") != std::string::npos &&
                  svg.find("event") != std::string::npos &&
                  svg.find("trend") != std::string::npos,
              "combined bias figure labels all three scenarios");
    }
    {
        const auto res = run_cli("plot --manifest " + (dir_original / "manifest.json").string() +
                                     " --window 9000 9100 --out " + (root / "plots_bad").string(),
                                 root);
        check(res.exit_code == 3, "window outside the data exits 3");
    }

    if (failures == 0) {
        std::cout << "cli driver: all checks passed\n";
        return 0;
    }
    std::cout << "cli driver: " << failures << " check(s) failed\n";
    return 1;
}
