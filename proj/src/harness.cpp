// SPDX-License-Identifier: Apache-2.0

#include "mwc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "mwc/error.hpp"
#include "mwc/fft.hpp"

namespace mwc {
namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return splitmix(splitmix(base) ^ index); }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

struct TrialRun {
    TrialRecord record;
    Acquisition acq;
    RecoveryResult result;
};

TrialRun run_trial_full(const SignalScenario& scenario, const MwcConfig& config, const BankSpec& bank,
                        const HarnessConfig& harness, int index, std::uint64_t seed, double carrier_tol_hz)
{
    const auto t0 = std::chrono::steady_clock::now();
    TrialRun run;
    TrialRecord& t = run.record;
    t.index = index;
    t.seed = seed;
    t.config = config;
    t.bank = bank;

    const WaveformBank wb = make_bank(bank, config);
    run.acq = acquire(scenario, config, wb, harness.grid_rate_hz);
    t.scenario = run.acq.scenario;
    t.sparsity = harness.sensing.sparsity >= 0 ? harness.sensing.sparsity : default_sparsity(t.scenario, config);

    SensingTimes times;
    run.result = sense(run.acq.samples, run.acq.C, t.sparsity, harness.sensing, &times);
    t.sensing_time_s = times.sensing_s();
    t.detected = run.result.support;
    t.truth = true_support(t.scenario, config.f_p, config.L);
    t.exact = t.detected == t.truth;
    t.success = boundary_neighbor_match(t.detected, t.truth, t.scenario, config.f_p, 1e-3 * config.f_p);

    for (const auto& c : run.result.carriers) t.carriers_hz.push_back(c.frequency_hz);
    t.carrier_success = !t.scenario.bands.empty();
    for (const auto& b : t.scenario.bands) {
        std::optional<double> err;
        for (double f : t.carriers_hz) {
            const double e = std::abs(f - b.carrier_hz);
            if (!err || e < *err) err = e;
        }
        if (!err || *err > carrier_tol_hz) t.carrier_success = false;
        t.carrier_errors_hz.push_back(err);
    }
    t.notes = run.result.notes;
    t.wall_time_s = seconds_since(t0);
    return run;
}

void add_criterion(ExperimentReport& r, std::string name, double value, std::string cmp, double threshold)
{
    Criterion c{std::move(name), value, threshold, cmp, false};
    c.passed = cmp == ">=" ? value >= threshold : value <= threshold;
    r.criteria.push_back(std::move(c));
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile_of(std::vector<double> v, double p)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

}  // namespace

HarnessConfig prototype_config() { return HarnessConfig{}; }

void to_json(Json& j, const HarnessConfig& c)
{
    j = Json{{"mwc", c.mwc},
             {"bank", c.bank},
             {"detect", c.sensing.detect},
             {"carriers",
              {{"min_fft", c.sensing.carriers.min_fft},
               {"occupancy_db", c.sensing.carriers.occupancy_db},
               {"spread_bins", c.sensing.carriers.spread_bins}}},
             {"sparsity", c.sensing.sparsity},
             {"f_max", c.f_max},
             {"grid_rate_hz", c.grid_rate_hz},
             {"workers", c.workers},
             {"seed", c.seed}};
}

void from_json(const Json& j, HarnessConfig& c)
{
    c = prototype_config();
    if (!j.is_object()) throw InvalidConfig("harness config must be a JSON object");
    if (j.contains("mwc")) {
        Json merged = c.mwc;
        merged.merge_patch(j.at("mwc"));
        if (j.at("mwc").contains("q") && !j.at("mwc").contains("f_s")) merged["f_s"] = merged["q"].get<int>() * merged["f_p"].get<double>();
        c.mwc = merged.get<MwcConfig>();
    }
    if (j.contains("bank")) c.bank = j.at("bank").get<BankSpec>();
    if (j.contains("detect")) {
        Json merged = c.sensing.detect;
        merged.merge_patch(j.at("detect"));
        c.sensing.detect = merged.get<DetectOptions>();
    }
    if (j.contains("carriers")) {
        const auto& k = j.at("carriers");
        c.sensing.carriers.min_fft = k.value("min_fft", c.sensing.carriers.min_fft);
        c.sensing.carriers.occupancy_db = k.value("occupancy_db", c.sensing.carriers.occupancy_db);
        c.sensing.carriers.spread_bins = k.value("spread_bins", c.sensing.carriers.spread_bins);
    }
    c.sensing.sparsity = j.value("sparsity", c.sensing.sparsity);
    c.f_max = j.value("f_max", c.f_max);
    c.grid_rate_hz = j.value("grid_rate_hz", c.grid_rate_hz);
    c.workers = j.value("workers", c.workers);
    c.seed = j.value("seed", c.seed);
    if (c.workers < 1) throw InvalidConfig("workers must be >= 1");
    if (!(c.f_max > 0.0)) throw InvalidConfig("f_max must be positive");
}

void to_json(Json& j, const TrialRecord& t)
{
    Json errs = Json::array();
    for (const auto& e : t.carrier_errors_hz) errs.push_back(optional_json(e));
    j = Json{{"index", t.index},
             {"seed", t.seed},
             {"axis_value", optional_json(t.axis_value)},
             {"scenario", t.scenario},
             {"config", t.config},
             {"bank", t.bank},
             {"sparsity", t.sparsity},
             {"detected_support", t.detected},
             {"true_support", t.truth},
             {"exact", t.exact},
             {"success", t.success},
             {"carriers_hz", t.carriers_hz},
             {"carrier_errors_hz", errs},
             {"carrier_success", t.carrier_success},
             {"wall_time_s", t.wall_time_s},
             {"sensing_time_s", t.sensing_time_s},
             {"notes", t.notes}};
}

void to_json(Json& j, const PointSummary& p)
{
    j = Json{{"value", p.value},         {"trials", p.trials},       {"successes", p.successes},
             {"rate", p.rate},           {"ci_lo", p.ci_lo},         {"ci_hi", p.ci_hi},
             {"degenerate_ci", p.degenerate_ci}, {"rejected", p.rejected}, {"diagnostic", p.diagnostic}};
}

bool ExperimentReport::passed() const
{
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.passed; });
}

void to_json(Json& j, const ExperimentReport& r)
{
    Json crit = Json::array();
    for (const auto& c : r.criteria)
        crit.push_back(Json{{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                            {"comparison", c.comparison}, {"passed", c.passed}});
    j = Json{{"schema_version", kReportSchemaVersion},
             {"kind", r.kind},
             {"config", r.config},
             {"axis", r.axis},
             {"trials", r.trials},
             {"points", r.points},
             {"aggregates", r.aggregates},
             {"outliers", r.outliers},
             {"criteria", crit},
             {"passed", r.passed()},
             {"diagnostics", r.diagnostics}};
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn)
{
    if (n <= 0) return;
    workers = std::clamp(workers, 1, n);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto body = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

bool boundary_neighbor_match(const SupportSet& detected, const SupportSet& truth, const SignalScenario& s,
                             double f_p, double tol_hz)
{
    std::vector<int> diff;
    std::set_symmetric_difference(detected.indices.begin(), detected.indices.end(), truth.indices.begin(),
                                  truth.indices.end(), std::back_inserter(diff));
    for (int d : diff) {
        const double lo = (d - 0.5) * f_p;
        const double hi = (d + 0.5) * f_p;
        // Reach of the nearest band into the slice: negative is the gap to the slice,
        // positive is how far inside the slice the band gets from its closer edge.
        const double mid = 0.5 * (lo + hi);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& b : s.bands) {
            const double half = b.occupied_width() / 2.0;
            for (double c : {b.carrier_hz, -b.carrier_hz}) {
                const double a = std::max(lo, c - half);
                const double e = std::min(hi, c + half);
                double reach;
                if (a > e) {
                    reach = e - a;
                } else {
                    const double p = std::clamp(mid, a, e);
                    reach = std::min(p - lo, hi - p);
                }
                best = std::max(best, reach);
            }
        }
        if (!(best >= -tol_hz && best <= tol_hz)) return false;
    }
    return true;
}

TrialRecord run_trial(const SignalScenario& scenario, const MwcConfig& config, const BankSpec& bank,
                      const HarnessConfig& harness, int index, std::uint64_t seed, double carrier_tol_hz)
{
    return run_trial_full(scenario, config, bank, harness, index, seed, carrier_tol_hz).record;
}

TrialRecord replay_trial(const TrialRecord& trial, const HarnessConfig& harness, double carrier_tol_hz)
{
    HarnessConfig h = harness;
    h.sensing.sparsity = trial.sparsity;
    TrialRecord r = run_trial(trial.scenario, trial.config, trial.bank, h, trial.index, trial.seed, carrier_tol_hz);
    r.axis_value = trial.axis_value;
    return r;
}

ExperimentReport run_sweep(const HarnessConfig& config, double f_start, double f_stop, double f_step)
{
    if (!(f_step > 0.0)) throw InvalidArgument("f_step must be positive");
    if (!(f_start <= f_stop)) throw InvalidArgument("f_start must not exceed f_stop");
    ExperimentReport rep;
    rep.kind = "sweep";
    rep.config = config;
    const double f_max = std::max(config.f_max, f_stop);
    if (f_max > config.f_max)
        rep.diagnostics.push_back("f_max raised to " + fmt(f_max) + " Hz to cover the sweep range");
    const int n = static_cast<int>(std::floor((f_stop - f_start) / f_step + 1e-9)) + 1;
    rep.trials.resize(static_cast<std::size_t>(n));
    parallel_for(n, config.workers, [&](int i) {
        SignalScenario s;
        s.f_max = f_max;
        s.n_bands_max = 2;
        s.band_width_max_hz = config.mwc.f_p;
        s.seed = derive_seed(config.seed, static_cast<std::uint64_t>(i));
        BandSpec b;
        b.carrier_hz = f_start + i * f_step;
        b.modulation = Modulation::pure_sine;
        s.bands.push_back(b);
        auto t = run_trial(s, config.mwc, config.bank, config, i, s.seed, 10e3);
        t.axis_value = b.carrier_hz;
        rep.trials[static_cast<std::size_t>(i)] = std::move(t);
    });

    int successes = 0, exact = 0, carrier_ok = 0;
    double max_err = 0.0;
    for (const auto& t : rep.trials) {
        exact += t.exact;
        if (!t.success) {
            rep.outliers.push_back(t.index);
            continue;
        }
        ++successes;
        carrier_ok += t.carrier_success;
        for (const auto& e : t.carrier_errors_hz)
            max_err = std::max(max_err, e ? *e : std::numeric_limits<double>::infinity());
    }
    const double frac = static_cast<double>(successes) / n;
    Json outlier_freqs = Json::array();
    for (int i : rep.outliers) outlier_freqs.push_back(*rep.trials[static_cast<std::size_t>(i)].axis_value);
    rep.aggregates = Json{{"trials", n},
                          {"successes", successes},
                          {"exact_matches", exact},
                          {"success_fraction", frac},
                          {"carrier_successes", carrier_ok},
                          {"max_carrier_error_on_successes_hz", max_err},
                          {"outlier_frequencies_hz", outlier_freqs}};
    add_criterion(rep, "support_success_fraction", frac, ">=", 0.99);
    add_criterion(rep, "max_carrier_error_on_successes_hz", max_err, "<=", 10e3);
    return rep;
}

SignalScenario mixture_scenario(std::uint64_t seed)
{
    SignalScenario s;
    s.f_max = 1e9;
    s.n_bands_max = 6;
    s.band_width_max_hz = 5e6;
    s.seed = seed;

    BandSpec am;
    am.carrier_hz = 807.8e6;
    am.modulation = Modulation::am;
    am.mod_params.envelope_hz = 100e3;
    am.mod_params.depth = 0.5;
    am.bandwidth_hz = 2.0 * am.mod_params.envelope_hz;

    BandSpec fm;
    fm.carrier_hz = 631.2e6;
    fm.modulation = Modulation::fm;
    fm.mod_params.deviation_hz = 1.5e6;
    fm.mod_params.rate_hz = 10e3;
    fm.bandwidth_hz = carson_bandwidth(fm.mod_params.deviation_hz, fm.mod_params.rate_hz);

    BandSpec tone;
    tone.carrier_hz = 981.9e6;
    tone.modulation = Modulation::pure_sine;

    s.bands = {am, fm, tone};
    return s;
}

double baseband_offset(double carrier_hz, double f_p)
{
    double r = std::fmod(carrier_hz, f_p);
    if (r < 0.0) r += f_p;
    if (r >= f_p / 2.0) r -= f_p;
    return r;
}

ExperimentReport run_mixture_demo(const HarnessConfig& config)
{
    ExperimentReport rep;
    rep.kind = "mixture";
    rep.config = config;
    MwcConfig mc = config.mwc;
    // FM sidebands sit on a 10 kHz grid, so the record spans a multiple of 2000 periods.
    constexpr int kBlock = 2000;
    mc.n_snapshots = std::max(1, (config.mwc.n_snapshots + kBlock - 1) / kBlock) * kBlock;
    SignalScenario s = mixture_scenario(config.seed);
    s.f_max = std::max(s.f_max, config.f_max);

    TrialRun run = run_trial_full(s, mc, config.bank, config, 0, config.seed, 50e3);
    const TrialRecord& t = run.record;

    double corr = std::numeric_limits<double>::quiet_NaN();
    const int am_slice = static_cast<int>(std::llround(s.bands[0].carrier_hz / mc.f_p));
    for (const auto& g : positive_groups(run.result.support)) {
        if (std::find(g.begin(), g.end(), am_slice) == g.end()) continue;
        if (run.result.slices.slices.empty()) break;
        bool complete = true;
        for (int l : g) complete = complete && run.result.slices.slices.count(l);
        if (!complete) break;
        const StitchedBand band = stitch_group(run.result.slices, g);
        const auto env = envelope(band);
        std::vector<double> ref(env.size());
        const auto& p = s.bands[0].mod_params;
        for (std::size_t n = 0; n < ref.size(); ++n)
            ref[n] = 1.0 + p.depth * std::cos(2.0 * std::numbers::pi * p.envelope_hz * static_cast<double>(n) / band.rate_hz);
        corr = correlation(env, ref);
    }

    // Baseband overlay: all carriers fold into one f_p-wide periodogram of the virtual rows.
    const auto& Y = run.acq.samples.rows;
    const auto K = static_cast<long long>(Y.cols());
    std::vector<double> pgram(static_cast<std::size_t>(K), 0.0);
    for (Eigen::Index r = 0; r < Y.rows(); ++r) {
        std::vector<Complex> row(static_cast<std::size_t>(K));
        for (long long n = 0; n < K; ++n) row[static_cast<std::size_t>(n)] = Y(r, n);
        const auto F = fft::forward(std::span<const Complex>(row));
        for (long long k = 0; k < K; ++k) pgram[static_cast<std::size_t>(k)] += std::norm(F[static_cast<std::size_t>(k)]);
    }
    const double global = *std::max_element(pgram.begin(), pgram.end());
    const double df = mc.f_p / static_cast<double>(K);
    Json overlay = Json::array();
    bool all_present = global > 0.0;
    for (const auto& b : s.bands) {
        const double off = baseband_offset(b.carrier_hz, mc.f_p);
        const double half = b.occupied_width() / 2.0 + 2.0 * df;
        double peak = 0.0;
        for (long long k = static_cast<long long>(std::floor((off - half) / df));
             k <= static_cast<long long>(std::ceil((off + half) / df)); ++k)
            peak = std::max(peak, pgram[fft::wrap(k, K)]);
        const double rel_db = peak > 0.0 && global > 0.0 ? 10.0 * std::log10(peak / global) : -400.0;
        const bool present = rel_db >= -60.0;
        all_present = all_present && present;
        double mod = std::fmod(b.carrier_hz, mc.f_p);
        overlay.push_back(Json{{"carrier_hz", b.carrier_hz},
                               {"offset_in_slice_hz", mod},
                               {"baseband_offset_hz", off},
                               {"peak_rel_db", rel_db},
                               {"present", present}});
    }

    double max_err = 0.0;
    for (const auto& e : t.carrier_errors_hz) max_err = std::max(max_err, e ? *e : std::numeric_limits<double>::infinity());
    rep.trials.push_back(t);
    rep.aggregates = Json{{"exact_support", t.exact},
                          {"success", t.success},
                          {"am_envelope_correlation", std::isnan(corr) ? Json(nullptr) : Json(corr)},
                          {"max_carrier_error_hz", max_err},
                          {"baseband_overlay", overlay},
                          {"overlay_present", all_present},
                          {"n_snapshots", mc.n_snapshots}};
    if (!t.success) rep.outliers.push_back(0);
    add_criterion(rep, "exact_support", t.exact ? 1.0 : 0.0, ">=", 1.0);
    add_criterion(rep, "am_envelope_correlation", std::isnan(corr) ? 0.0 : corr, ">=", 0.95);
    add_criterion(rep, "max_carrier_error_hz", max_err, "<=", 50e3);
    return rep;
}

std::string to_string(McAxis a)
{
    switch (a) {
    case McAxis::m: return "m";
    case McAxis::snr_db: return "snr_db";
    case McAxis::n_snapshots: return "n_snapshots";
    case McAxis::sparsity: return "sparsity";
    }
    return "m";
}

McAxis mc_axis_from_string(const std::string& s)
{
    if (s == "m") return McAxis::m;
    if (s == "snr_db") return McAxis::snr_db;
    if (s == "n_snapshots") return McAxis::n_snapshots;
    if (s == "sparsity") return McAxis::sparsity;
    throw InvalidArgument("unknown Monte Carlo axis '" + s + "'");
}

SignalScenario random_tone_scenario(std::uint64_t seed, int tones, double f_max, const MwcConfig& c,
                                    std::optional<double> snr_db)
{
    if (tones < 0) throw InvalidArgument("tone count must be non-negative");
    SignalScenario s;
    s.f_max = f_max;
    s.n_bands_max = 2 * tones;
    s.band_width_max_hz = c.f_p;
    s.snr_db = snr_db;
    s.seed = seed;
    const double df = c.f_p / static_cast<double>(c.n_snapshots);
    const auto lo = static_cast<long long>(std::ceil(c.f_p / df));
    const auto hi = static_cast<long long>(std::floor((std::min(f_max, (c.L + 0.5) * c.f_p) - c.f_p) / df));
    if (hi - lo + 1 < tones) throw InvalidArgument("too many tones for the available band");
    std::mt19937_64 rng(derive_seed(seed, 0x746f6e65ULL));
    std::uniform_int_distribution<long long> bin(lo, hi);
    std::uniform_real_distribution<double> amp(0.5, 1.0);
    std::set<long long> used;
    while (static_cast<int>(used.size()) < tones) {
        const long long k = bin(rng);
        if (!used.insert(k).second) continue;
        BandSpec b;
        b.carrier_hz = static_cast<double>(k) * df;
        b.amplitude = amp(rng);
        s.bands.push_back(b);
    }
    return s;
}

void binomial_interval(int successes, int trials, double& lo, double& hi, bool& degenerate)
{
    degenerate = trials < 2;
    if (trials <= 0) {
        lo = hi = 0.0;
        return;
    }
    const double p = static_cast<double>(successes) / trials;
    if (degenerate) {
        lo = hi = p;
        return;
    }
    const double z = 1.959963984540054;
    const double n = trials;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    lo = std::max(0.0, centre - half);
    hi = std::min(1.0, centre + half);
}

ExperimentReport run_monte_carlo(const HarnessConfig& config, const MonteCarloOptions& opt)
{
    if (opt.trials_per_point < 1) throw InvalidArgument("trials_per_point must be >= 1");
    ExperimentReport rep;
    rep.kind = "montecarlo";
    rep.axis = to_string(opt.axis);
    rep.config = config;

    struct Job {
        std::size_t point;
        int trial;
        MwcConfig mwc;
        HarnessConfig harness;
        SignalScenario scenario;
        BankSpec bank;
    };
    std::vector<Job> jobs;
    rep.points.resize(opt.grid.size());
    // Along the snapshot axis every point reuses one scenario set, drawn on the
    // frequency grid of the shortest record so each longer record stays bin-aligned.
    int scenario_snapshots = config.mwc.n_snapshots;
    if (opt.axis == McAxis::n_snapshots) {
        int k_min = 0;
        for (double v : opt.grid)
            if (v >= 1 && v == std::floor(v)) k_min = k_min == 0 ? static_cast<int>(v) : std::min(k_min, static_cast<int>(v));
        if (k_min > 0) scenario_snapshots = k_min;
    }
    for (std::size_t p = 0; p < opt.grid.size(); ++p) {
        const double v = opt.grid[p];
        PointSummary& ps = rep.points[p];
        ps.value = v;
        MwcConfig mc = config.mwc;
        HarnessConfig h = config;
        int tones = opt.tones;
        std::optional<double> snr = opt.snr_db;
        switch (opt.axis) {
        case McAxis::m:
            if (v < 1 || v != std::floor(v)) ps.diagnostic = "m must be a positive integer";
            mc.m = static_cast<int>(v);
            break;
        case McAxis::n_snapshots:
            if (v < 1 || v != std::floor(v)) ps.diagnostic = "n_snapshots must be a positive integer";
            mc.n_snapshots = static_cast<int>(v);
            break;
        case McAxis::snr_db:
            snr = v;
            break;
        case McAxis::sparsity:
            if (v < 0 || v != std::floor(v))
                ps.diagnostic = "sparsity must be a non-negative integer";
            else if (v > mc.columns())
                ps.diagnostic = "sparsity " + fmt(v) + " exceeds 2L+1 = " + std::to_string(mc.columns());
            tones = static_cast<int>(v) / 2;
            h.sensing.sparsity = static_cast<int>(v);
            break;
        }
        if (snr) h.sensing.detect.noise_aware = true;
        if (ps.diagnostic.empty()) {
            try {
                check_structure(mc);
            } catch (const std::exception& e) {
                ps.diagnostic = e.what();
            }
        }
        if (!ps.diagnostic.empty()) {
            ps.rejected = true;
            rep.diagnostics.push_back("point " + fmt(v) + " rejected: " + ps.diagnostic);
            continue;
        }
        for (int t = 0; t < opt.trials_per_point; ++t) {
            const std::uint64_t seed = derive_seed(opt.seed, static_cast<std::uint64_t>(t));
            BankSpec bank = config.bank;
            bank.seed = derive_seed(seed, 0x62616e6bULL);
            MwcConfig draw = mc;
            draw.n_snapshots = scenario_snapshots;
            jobs.push_back(Job{p, t, mc, h, random_tone_scenario(seed, tones, config.f_max, draw, snr), bank});
        }
    }

    rep.trials.resize(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), config.workers, [&](int i) {
        const Job& j = jobs[static_cast<std::size_t>(i)];
        auto t = run_trial(j.scenario, j.mwc, j.bank, j.harness, i, j.scenario.seed, 10e3);
        t.axis_value = opt.grid[j.point];
        rep.trials[static_cast<std::size_t>(i)] = std::move(t);
    });

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        PointSummary& ps = rep.points[jobs[i].point];
        ++ps.trials;
        ps.successes += rep.trials[i].success;
        if (!rep.trials[i].success) rep.outliers.push_back(static_cast<int>(i));
    }
    Json curve = Json::array();
    for (auto& ps : rep.points) {
        if (!ps.rejected) {
            ps.rate = static_cast<double>(ps.successes) / ps.trials;
            binomial_interval(ps.successes, ps.trials, ps.ci_lo, ps.ci_hi, ps.degenerate_ci);
        }
        curve.push_back(ps);
    }
    rep.aggregates = Json{{"axis", rep.axis}, {"trials_per_point", opt.trials_per_point}, {"curve", curve}};

    if (opt.axis == McAxis::m) {
        std::vector<const PointSummary*> ok;
        for (const auto& ps : rep.points)
            if (!ps.rejected) ok.push_back(&ps);
        std::sort(ok.begin(), ok.end(), [](auto* a, auto* b) { return a->value < b->value; });
        bool monotone = true;
        for (std::size_t i = 1; i < ok.size(); ++i) monotone = monotone && ok[i]->rate >= ok[i - 1]->rate;
        add_criterion(rep, "success_non_decreasing_in_m", monotone ? 1.0 : 0.0, ">=", 1.0);
    }
    return rep;
}

std::string monte_carlo_csv(const ExperimentReport& r)
{
    std::ostringstream os;
    os << std::setprecision(10);
    os << "axis,value,trials,successes,rate,ci_lo,ci_hi,degenerate_ci,rejected,diagnostic\n";
    for (const auto& p : r.points) {
        std::string diag = p.diagnostic;
        std::replace(diag.begin(), diag.end(), ',', ';');
        os << r.axis << ',' << p.value << ',' << p.trials << ',' << p.successes << ',' << p.rate << ',' << p.ci_lo
           << ',' << p.ci_hi << ',' << (p.degenerate_ci ? 1 : 0) << ',' << (p.rejected ? 1 : 0) << ',' << diag << '\n';
    }
    return os.str();
}

std::string sweep_csv(const ExperimentReport& r)
{
    std::ostringstream os;
    os << std::setprecision(12);
    os << "index,frequency_hz,success,exact,carrier_hz,carrier_error_hz,detected,true\n";
    auto join = [](const SupportSet& s) {
        std::string out;
        for (int l : s.indices) out += (out.empty() ? "" : " ") + std::to_string(l);
        return out;
    };
    for (const auto& t : r.trials) {
        os << t.index << ',' << t.axis_value.value_or(0.0) << ',' << t.success << ',' << t.exact << ',';
        if (!t.carriers_hz.empty()) os << t.carriers_hz.front();
        os << ',';
        if (!t.carrier_errors_hz.empty() && t.carrier_errors_hz.front()) os << *t.carrier_errors_hz.front();
        os << ',' << join(t.detected) << ',' << join(t.truth) << '\n';
    }
    return os.str();
}

std::string monte_carlo_svg(const ExperimentReport& r)
{
    const double W = 640, H = 400, ml = 60, mr = 20, mt = 30, mb = 50;
    std::vector<const PointSummary*> pts;
    for (const auto& p : r.points)
        if (!p.rejected) pts.push_back(&p);
    std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->value < b->value; });
    double xmin = pts.empty() ? 0.0 : pts.front()->value;
    double xmax = pts.empty() ? 1.0 : pts.back()->value;
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto Y = [&](double v) { return H - mb - v * (H - mt - mb); };
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << Y(0) << "\" x2=\"" << W - mr << "\" y2=\"" << Y(0) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << Y(0) << "\" x2=\"" << ml << "\" y2=\"" << Y(1) << "\" stroke=\"black\"/>\n";
    for (double v : {0.0, 0.5, 1.0})
        os << "<text x=\"" << ml - 8 << "\" y=\"" << Y(v) + 4 << "\" font-size=\"12\" text-anchor=\"end\">" << v
           << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"14\" text-anchor=\"middle\">" << r.axis
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"14\" transform=\"rotate(-90 16 " << H / 2
       << ")\" text-anchor=\"middle\">success rate</text>\n";
    if (!pts.empty()) {
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (auto* p : pts) os << X(p->value) << ',' << Y(p->rate) << ' ';
        os << "\"/>\n";
    }
    for (auto* p : pts) {
        os << "<line x1=\"" << X(p->value) << "\" y1=\"" << Y(p->ci_lo) << "\" x2=\"" << X(p->value) << "\" y2=\""
           << Y(p->ci_hi) << "\" stroke=\"gray\"/>\n";
        os << "<circle cx=\"" << X(p->value) << "\" cy=\"" << Y(p->rate) << "\" r=\"3\" fill=\"steelblue\"/>\n";
        os << "<text x=\"" << X(p->value) << "\" y=\"" << H - mb + 16 << "\" font-size=\"12\" text-anchor=\"middle\">"
           << p->value << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void to_json(Json& j, const TimingReport& t)
{
    j = Json{{"samples_s", t.samples_s}, {"mean_s", t.mean_s}, {"median_s", t.median_s}, {"p95_s", t.p95_s},
             {"rows", t.rows},           {"cols", t.cols},     {"snapshots", t.snapshots}};
}

TimingReport time_sensing(const HarnessConfig& config, int repetitions)
{
    if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
    const MwcConfig& mc = config.mwc;
    const SignalScenario s = random_tone_scenario(config.seed, 3, config.f_max, mc, std::nullopt);
    const Acquisition acq = acquire(s, mc, make_bank(config.bank, mc), config.grid_rate_hz);
    const int sparsity = config.sensing.sparsity >= 0 ? config.sensing.sparsity : default_sparsity(s, mc);

    TimingReport rep;
    rep.rows = static_cast<int>(acq.C.rows());
    rep.cols = static_cast<int>(acq.C.cols());
    rep.snapshots = static_cast<int>(acq.samples.snapshots());
    for (int r = 0; r < repetitions; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const RecoveryResult res = sense(acq.samples, acq.C, sparsity, config.sensing);
        rep.samples_s.push_back(seconds_since(t0));
        (void)res;
    }
    rep.mean_s = std::accumulate(rep.samples_s.begin(), rep.samples_s.end(), 0.0) / repetitions;
    rep.median_s = median_of(rep.samples_s);
    rep.p95_s = percentile_of(rep.samples_s, 0.95);
    return rep;
}

ExperimentReport timing_experiment(const HarnessConfig& config, int repetitions)
{
    ExperimentReport rep;
    rep.kind = "time";
    rep.config = config;
    const TimingReport t = time_sensing(config, repetitions);
    rep.aggregates = t;
    add_criterion(rep, "median_sensing_time_s", t.median_s, "<=", 0.050);
    return rep;
}

}  // namespace mwc
