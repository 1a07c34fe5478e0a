// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mwc/pipeline.hpp"

namespace mwc {

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Everything an experiment needs besides its own axis parameters.
struct HarnessConfig {
    MwcConfig mwc{4, 3, 20e6, 70e6, 108, 55, 64};
    BankSpec bank;
    SensingOptions sensing;
    double f_max = 1e9;
    double grid_rate_hz = 0.0;  ///< 0 selects the default grid
    int workers = 1;
    std::uint64_t seed = 1;
};

void to_json(Json& j, const HarnessConfig& c);
void from_json(const Json& j, HarnessConfig& c);

/// The hardware-prototype shape: m = 4, q = 3, f_p = 20 MHz, f_s = 70 MHz, 12 x 111.
HarnessConfig prototype_config();

struct TrialRecord {
    int index = 0;
    std::uint64_t seed = 0;              ///< replays the scenario draw
    std::optional<double> axis_value;
    SignalScenario scenario;
    MwcConfig config;
    BankSpec bank;
    int sparsity = 0;
    SupportSet detected;
    SupportSet truth;
    bool exact = false;
    bool success = false;                ///< exact up to slice-boundary neighbors
    std::vector<std::optional<double>> carrier_errors_hz;  ///< per scenario band; empty when no estimate
    bool carrier_success = false;
    std::vector<double> carriers_hz;
    double wall_time_s = 0.0;
    double sensing_time_s = 0.0;
    std::vector<std::string> notes;
};

void to_json(Json& j, const TrialRecord& t);

struct PointSummary {
    double value = 0.0;
    int trials = 0;
    int successes = 0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool degenerate_ci = false;
    bool rejected = false;
    std::string diagnostic;
};

void to_json(Json& j, const PointSummary& p);

struct Criterion {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparison;  ///< ">=" or "<="
    bool passed = false;
};

struct ExperimentReport {
    std::string kind;
    HarnessConfig config;
    std::vector<TrialRecord> trials;
    std::vector<PointSummary> points;
    std::string axis;
    Json aggregates = Json::object();
    std::vector<int> outliers;
    std::vector<Criterion> criteria;
    std::vector<std::string> diagnostics;

    bool passed() const;
};

void to_json(Json& j, const ExperimentReport& r);

/// Runs fn(i) for i in [0, n) on a pool of `workers` threads. Exceptions propagate
/// after every index has been attempted; the exception of the lowest index wins.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Success rule shared by every experiment: each slice in the symmetric difference
/// of detected and true supports must be a boundary neighbor: some band comes within
/// `tol_hz` of it, and none reaches more than `tol_hz` past its nearer edge.
bool boundary_neighbor_match(const SupportSet& detected, const SupportSet& truth, const SignalScenario& scenario,
                             double f_p, double tol_hz);

/// Runs the acquisition and sensing pipeline for one scenario.
TrialRecord run_trial(const SignalScenario& scenario, const MwcConfig& config, const BankSpec& bank,
                      const HarnessConfig& harness, int index, std::uint64_t seed, double carrier_tol_hz);

/// Reruns a recorded trial from its stored scenario, config and bank.
TrialRecord replay_trial(const TrialRecord& trial, const HarnessConfig& harness, double carrier_tol_hz = 10e3);

/// Pure-sine sweep with inclusive endpoints.
ExperimentReport run_sweep(const HarnessConfig& config, double f_start, double f_stop, double f_step);

/// Mixture used by run_mixture_demo: AM at 807.8 MHz, FM at 631.2 MHz, sine at 981.9 MHz.
SignalScenario mixture_scenario(std::uint64_t seed = 1);

/// Signed baseband offset of a carrier after folding by f_p, in [-f_p/2, f_p/2).
double baseband_offset(double carrier_hz, double f_p);

ExperimentReport run_mixture_demo(const HarnessConfig& config);

enum class McAxis { m, snr_db, n_snapshots, sparsity };
std::string to_string(McAxis a);
McAxis mc_axis_from_string(const std::string& s);

struct MonteCarloOptions {
    McAxis axis = McAxis::m;
    std::vector<double> grid;
    int trials_per_point = 100;
    std::uint64_t seed = 1;
    int tones = 3;                         ///< real tones per scenario unless the axis is sparsity
    std::optional<double> snr_db;          ///< fixed SNR when the axis is not snr_db
};

/// Random bin-aligned multi-tone scenario; tones are drawn on the f_p / K grid.
SignalScenario random_tone_scenario(std::uint64_t seed, int tones, double f_max, const MwcConfig& config,
                                    std::optional<double> snr_db);

/// Wilson score interval at 95 %; degenerate (zero width) when trials < 2.
void binomial_interval(int successes, int trials, double& lo, double& hi, bool& degenerate);

ExperimentReport run_monte_carlo(const HarnessConfig& config, const MonteCarloOptions& options);

std::string monte_carlo_csv(const ExperimentReport& report);
std::string monte_carlo_svg(const ExperimentReport& report);
std::string sweep_csv(const ExperimentReport& report);

struct TimingReport {
    std::vector<double> samples_s;
    double mean_s = 0.0;
    double median_s = 0.0;
    double p95_s = 0.0;
    int rows = 0;
    int cols = 0;
    int snapshots = 0;
};

void to_json(Json& j, const TimingReport& t);

/// Wall time of support detection plus carrier estimation (slice recovery included,
/// since carriers are estimated from recovered slices). Synthesis and front-end
/// simulation run once, outside the timed region.
TimingReport time_sensing(const HarnessConfig& config, int repetitions);

ExperimentReport timing_experiment(const HarnessConfig& config, int repetitions);

}  // namespace mwc
