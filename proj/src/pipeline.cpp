// SPDX-License-Identifier: Apache-2.0

#include "mwc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "mwc/error.hpp"

namespace mwc {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void to_json(Json& j, const BankSpec& b)
{
    j = Json{{"mode", b.mode == BankDerivation::tapped_register ? "tapped_register" : "independent_random"},
             {"seed", b.seed}};
    if (b.base) j["base"] = *b.base;
    if (!b.taps.empty()) j["taps"] = b.taps;
}

void from_json(const Json& j, BankSpec& b)
{
    const auto mode = j.value("mode", std::string("independent_random"));
    if (mode == "tapped_register")
        b.mode = BankDerivation::tapped_register;
    else if (mode == "independent_random")
        b.mode = BankDerivation::independent_random;
    else
        throw InvalidArgument("unknown bank mode '" + mode + "'");
    b.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("base") && !j.at("base").is_null())
        b.base = j.at("base").get<ChipPattern>();
    else
        b.base.reset();
    b.taps = j.value("taps", std::vector<std::size_t>{});
}

WaveformBank make_bank(const BankSpec& spec, const MwcConfig& c)
{
    check_structure(c);
    const auto m = static_cast<std::size_t>(c.m);
    const auto M = static_cast<std::size_t>(c.m_chips);
    if (spec.mode == BankDerivation::independent_random) return gen_random_bank(m, M, spec.seed, c.period_s());

    ChipPattern base;
    if (spec.base) {
        base = *spec.base;
        if (base.size() != M) throw InvalidArgument("tapped base length differs from m_chips");
        base.period_s = c.period_s();
    } else {
        base = gen_random_bank(1, M, spec.seed, c.period_s()).patterns.front();
    }
    std::vector<std::size_t> taps = spec.taps;
    if (taps.empty()) {
        const std::size_t step = std::max<std::size_t>(1, M / m);
        for (std::size_t i = 0; i < m; ++i) taps.push_back(i * step);
    }
    if (taps.size() != m) throw InvalidArgument("tap count differs from config.m");
    return gen_tapped_bank(base, taps);
}

double record_duration(const SignalScenario& s, const MwcConfig& c)
{
    long long periods = c.n_snapshots;
    if (s.duration_s > 0.0) periods = std::max<long long>(1, std::llround(s.duration_s * c.f_p));
    return static_cast<double>(periods) / c.f_p;
}

Acquisition acquire(const SignalScenario& scenario, const MwcConfig& config, const WaveformBank& bank,
                    double grid_rate_hz)
{
    check_structure(config);
    Acquisition a;
    a.scenario = scenario;
    a.scenario.duration_s = record_duration(scenario, config);
    a.grid_rate_hz = grid_rate_hz > 0.0 ? grid_rate_hz : default_grid_rate(config, scenario.f_max);
    a.x = synthesize(a.scenario, a.grid_rate_hz);
    a.raw = simulate_frontend(a.x, bank, config);
    a.samples = expand_channels(a.raw, config);
    a.C = build_matrix(bank, config);
    return a;
}

int default_sparsity(const SignalScenario& s, const MwcConfig& c)
{
    return std::max(0, std::min({2 * s.n_bands_max, c.virtual_rows(), c.columns()}));
}

RecoveryResult sense(const SampleMatrix& samples, const SensingMatrix& C, int sparsity, const SensingOptions& opt,
                     SensingTimes* times)
{
    SensingTimes local;
    RecoveryResult r;

    auto t0 = std::chrono::steady_clock::now();
    Detection det = detect_support(samples, C, sparsity, opt.detect);
    local.detect_s = seconds_since(t0);
    r.support = det.support;
    r.diagnostics = det.diagnostics;
    r.holes = spectrum_holes(r.support, C.f_p, C.L, true);

    if (!r.support.empty()) {
        t0 = std::chrono::steady_clock::now();
        try {
            r.slices = recover_slices(samples, C, r.support);
        } catch (const ReconstructionIllPosed& e) {
            r.notes.push_back(std::string("reconstruction skipped: ") + e.what());
        }
        local.recover_s = seconds_since(t0);
        if (!r.slices.slices.empty()) {
            t0 = std::chrono::steady_clock::now();
            CarrierReport cr = estimate_carriers(r.slices, r.support, opt.carriers);
            local.carriers_s = seconds_since(t0);
            r.carriers = std::move(cr.carriers);
            r.notes.insert(r.notes.end(), cr.diagnostics.begin(), cr.diagnostics.end());
        }
    } else {
        r.slices.f_p = C.f_p;
    }
    if (times) *times = local;
    return r;
}

}  // namespace mwc
