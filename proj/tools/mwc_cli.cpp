// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: sweep, mixture, montecarlo, time, validate-config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mwc/error.hpp"
#include "mwc/harness.hpp"

namespace fs = std::filesystem;
using namespace mwc;

namespace {

std::vector<double> parse_grid(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

int report_and_exit(const ExperimentReport& r, const fs::path& out_dir, const std::string& stem)
{
    write_file(out_dir / (stem + ".json"), Json(r).dump(2));
    for (const auto& c : r.criteria)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (" << c.comparison << ' '
                  << c.threshold << ")\n";
    for (const auto& d : r.diagnostics) std::cout << "note: " << d << '\n';
    std::cout << "report: " << (out_dir / (stem + ".json")).string() << '\n';
    return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MWC spectrum-sensing experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::optional<int> workers;
    bool svg = false;
    app.add_option("--config", config_path, "harness configuration JSON file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "base seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--svg", svg, "also render SVG plots");

    auto* sweep = app.add_subcommand("sweep", "pure-sine frequency sweep");
    double f_start = 100e6, f_stop = 1100e6, f_step = 5e6;
    sweep->add_option("--f-start", f_start, "first frequency [Hz]");
    sweep->add_option("--f-stop", f_stop, "last frequency [Hz], inclusive");
    sweep->add_option("--f-step", f_step, "frequency step [Hz]");

    auto* mixture = app.add_subcommand("mixture", "AM / FM / sine mixture demonstration");

    auto* mc = app.add_subcommand("montecarlo", "success-rate curve along one axis");
    std::string axis = "m", grid = "3,4,5";
    int trials = 100, tones = 3;
    std::optional<double> snr;
    mc->add_option("--axis", axis, "m | snr_db | n_snapshots | sparsity")
        ->check(CLI::IsMember({"m", "snr_db", "n_snapshots", "sparsity"}));
    mc->add_option("--grid", grid, "comma-separated axis values");
    mc->add_option("--trials", trials, "trials per point")->check(CLI::PositiveNumber);
    mc->add_option("--tones", tones, "real tones per scenario");
    mc->add_option("--snr-db", snr, "fixed SNR for non-SNR axes");

    auto* tm = app.add_subcommand("time", "wall time of support detection and carrier estimation");
    int reps = 50;
    tm->add_option("--reps", reps, "repetitions")->check(CLI::PositiveNumber);

    auto* vc = app.add_subcommand("validate-config", "rate accounting and structural checks");
    double vc_fmax = 0.0;
    vc->add_option("--f-max", vc_fmax, "maximal input frequency [Hz]; defaults to the config value");

    CLI11_PARSE(app, argc, argv);

    try {
        HarnessConfig cfg = prototype_config();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            cfg = Json::parse(in).get<HarnessConfig>();
        }
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        fs::create_directories(out_dir);

        if (*sweep) {
            const auto r = run_sweep(cfg, f_start, f_stop, f_step);
            write_file(fs::path(out_dir) / "sweep.csv", sweep_csv(r));
            std::cout << "trials " << r.trials.size() << ", outliers " << r.outliers.size() << '\n';
            return report_and_exit(r, out_dir, "sweep");
        }
        if (*mixture) {
            const auto r = run_mixture_demo(cfg);
            std::cout << r.aggregates.dump(2) << '\n';
            return report_and_exit(r, out_dir, "mixture");
        }
        if (*mc) {
            MonteCarloOptions o;
            o.axis = mc_axis_from_string(axis);
            o.grid = parse_grid(grid);
            o.trials_per_point = trials;
            o.seed = cfg.seed;
            o.tones = tones;
            o.snr_db = snr;
            const auto r = run_monte_carlo(cfg, o);
            write_file(fs::path(out_dir) / "montecarlo.csv", monte_carlo_csv(r));
            if (svg) write_file(fs::path(out_dir) / "montecarlo.svg", monte_carlo_svg(r));
            std::cout << monte_carlo_csv(r);
            return report_and_exit(r, out_dir, "montecarlo");
        }
        if (*tm) {
            const auto r = timing_experiment(cfg, reps);
            std::cout << "median " << r.aggregates.at("median_s").get<double>() * 1e3 << " ms, mean "
                      << r.aggregates.at("mean_s").get<double>() * 1e3 << " ms, p95 "
                      << r.aggregates.at("p95_s").get<double>() * 1e3 << " ms\n";
            return report_and_exit(r, out_dir, "time");
        }
        if (*vc) {
            SignalScenario s;
            s.f_max = vc_fmax > 0.0 ? vc_fmax : cfg.f_max;
            check_structure(cfg.mwc);
            const RateReport rr = validate_config(cfg.mwc, s);
            const Json j = rr;
            write_file(fs::path(out_dir) / "rate_report.json", j.dump(2));
            std::cout << j.dump(2) << '\n';
            return 0;
        }
    } catch (const InvalidConfig& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
