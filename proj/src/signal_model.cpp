// SPDX-License-Identifier: Apache-2.0

#include "mwc/signal_model.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

namespace mwc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix(std::uint64_t h, std::uint64_t v)
{
    // 64-bit FNV-1a over the bytes of v
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t band_hash(const BandSpec& b)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = mix(h, std::bit_cast<std::uint64_t>(b.carrier_hz));
    h = mix(h, std::bit_cast<std::uint64_t>(b.bandwidth_hz));
    h = mix(h, std::bit_cast<std::uint64_t>(b.amplitude));
    h = mix(h, static_cast<std::uint64_t>(b.modulation));
    h = mix(h, std::bit_cast<std::uint64_t>(b.mod_params.envelope_hz));
    h = mix(h, std::bit_cast<std::uint64_t>(b.mod_params.depth));
    h = mix(h, std::bit_cast<std::uint64_t>(b.mod_params.deviation_hz));
    h = mix(h, std::bit_cast<std::uint64_t>(b.mod_params.rate_hz));
    return h;
}

// Fractional part of f * t computed as f * (n / rate) with the integer part of
// the cycle count removed before scaling by 2 pi.
double cycles(double f, double t)
{
    const double c = f * t;
    return c - std::floor(c);
}

void render_band(const BandSpec& b, double phase, double rate, double t0, std::vector<double>& out)
{
    const double a = b.amplitude;
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double t = t0 + static_cast<double>(n) / rate;
        const double carrier = kTwoPi * cycles(b.carrier_hz, t) + phase;
        double v = 0.0;
        switch (b.modulation) {
        case Modulation::pure_sine:
            v = a * std::cos(carrier);
            break;
        case Modulation::am:
            v = a * (1.0 + b.mod_params.depth * std::cos(kTwoPi * cycles(b.mod_params.envelope_hz, t))) *
                std::cos(carrier);
            break;
        case Modulation::fm: {
            const double beta = b.mod_params.deviation_hz / b.mod_params.rate_hz;
            v = a * std::cos(carrier + beta * std::sin(kTwoPi * cycles(b.mod_params.rate_hz, t)));
            break;
        }
        }
        out[n] += v;
    }
}

}  // namespace

std::string to_string(Modulation m)
{
    switch (m) {
    case Modulation::pure_sine: return "pure_sine";
    case Modulation::am: return "am";
    case Modulation::fm: return "fm";
    }
    return "pure_sine";
}

Modulation modulation_from_string(const std::string& s)
{
    if (s == "pure_sine") return Modulation::pure_sine;
    if (s == "am") return Modulation::am;
    if (s == "fm") return Modulation::fm;
    throw InvalidArgument("unknown modulation '" + s + "'");
}

double carson_bandwidth(double deviation_hz, double rate_hz) { return 2.0 * (deviation_hz + rate_hz); }

double nyquist_rate(double f_max)
{
    if (!(f_max > 0.0)) throw InvalidArgument("f_max must be positive");
    return 2.0 * f_max;
}

std::vector<FieldError> check_scenario(const SignalScenario& s)
{
    std::vector<FieldError> errs;
    if (!(s.f_max > 0.0)) errs.push_back({"/f_max", "must be positive"});
    if (s.n_bands_max < 0) errs.push_back({"/n_bands_max", "must be non-negative"});
    if (!(s.band_width_max_hz > 0.0)) errs.push_back({"/band_width_max_hz", "must be positive"});
    if (!(s.duration_s >= 0.0)) errs.push_back({"/duration_s", "must be non-negative"});
    if (2 * static_cast<long long>(s.bands.size()) > s.n_bands_max)
        errs.push_back({"/bands", "each band occupies two of the n_bands_max intervals; " +
                                      std::to_string(s.bands.size()) + " bands exceed n_bands_max=" +
                                      std::to_string(s.n_bands_max)});
    for (std::size_t i = 0; i < s.bands.size(); ++i) {
        const auto& b = s.bands[i];
        const std::string p = "/bands/" + std::to_string(i);
        const double half = b.occupied_width() / 2.0;
        if (!(b.carrier_hz > 0.0)) errs.push_back({p + "/carrier_hz", "must be positive"});
        if (!(b.bandwidth_hz >= 0.0)) errs.push_back({p + "/bandwidth_hz", "must be non-negative"});
        if (b.carrier_hz + half > s.f_max)
            errs.push_back({p + "/carrier_hz", "band upper edge exceeds f_max"});
        if (b.carrier_hz - half < 0.0) errs.push_back({p + "/carrier_hz", "band lower edge below 0 Hz"});
        if (b.occupied_width() > s.band_width_max_hz)
            errs.push_back({p + "/bandwidth_hz", "exceeds band_width_max_hz"});
        if (!std::isfinite(b.amplitude)) errs.push_back({p + "/amplitude", "must be finite"});
        if (b.modulation == Modulation::am) {
            if (!(b.mod_params.envelope_hz > 0.0))
                errs.push_back({p + "/mod_params/envelope_hz", "AM needs a positive envelope rate"});
            if (b.bandwidth_hz < 2.0 * b.mod_params.envelope_hz)
                errs.push_back({p + "/bandwidth_hz", "narrower than the AM sidebands (2 x envelope)"});
        }
        if (b.modulation == Modulation::fm) {
            if (!(b.mod_params.rate_hz > 0.0))
                errs.push_back({p + "/mod_params/rate_hz", "FM needs a positive modulating rate"});
            if (!(b.mod_params.deviation_hz >= 0.0))
                errs.push_back({p + "/mod_params/deviation_hz", "must be non-negative"});
            if (b.bandwidth_hz < 2.0 * b.mod_params.deviation_hz)
                errs.push_back({p + "/bandwidth_hz", "narrower than twice the FM deviation"});
        }
    }
    return errs;
}

void validate_scenario(const SignalScenario& s)
{
    auto errs = check_scenario(s);
    if (!errs.empty()) throw InvalidScenario(std::move(errs));
}

double band_phase(const BandSpec& band, std::uint64_t seed)
{
    if (band.phase_rad) return *band.phase_rad;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(band_hash(band)), static_cast<std::uint32_t>(band_hash(band) >> 32)};
    std::mt19937_64 rng(seq);
    return std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
}

DenseSignal synthesize_clean(const SignalScenario& s, double grid_rate)
{
    validate_scenario(s);
    if (!(grid_rate >= nyquist_rate(s.f_max)))
        throw InvalidArgument("grid rate below the Nyquist rate of the scenario");
    DenseSignal x;
    x.sample_rate_hz = grid_rate;
    x.f_max_hz = s.f_max;
    x.samples.assign(static_cast<std::size_t>(std::llround(s.duration_s * grid_rate)), 0.0);
    for (const auto& b : s.bands) render_band(b, band_phase(b, s.seed), grid_rate, x.t0, x.samples);
    return x;
}

DenseSignal synthesize(const SignalScenario& s, double grid_rate)
{
    DenseSignal x = synthesize_clean(s, grid_rate);
    if (!s.snr_db || x.samples.empty()) return x;
    double power = 0.0;
    for (double v : x.samples) power += v * v;
    power /= static_cast<double>(x.samples.size());
    if (power == 0.0) return x;
    const double sigma = std::sqrt(power / std::pow(10.0, *s.snr_db / 10.0));
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32), 0x6e6f6973U};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : x.samples) v += gauss(rng);
    return x;
}

SupportSet true_support(const SignalScenario& s, double f_p, int L)
{
    SupportSet out;
    if (!(f_p > 0.0)) throw InvalidArgument("f_p must be positive");
    constexpr double eps = 1e-12;
    for (const auto& b : s.bands) {
        const double half = b.occupied_width() / 2.0;
        const double lo = (b.carrier_hz - half) / f_p;
        const double hi = (b.carrier_hz + half) / f_p;
        const auto first = static_cast<long long>(std::ceil(lo - 0.5 - eps * std::max(1.0, std::abs(lo))));
        const auto last = static_cast<long long>(std::floor(hi + 0.5 + eps * std::max(1.0, std::abs(hi))));
        for (long long l = first; l <= last; ++l) {
            if (l > L || l < -L) continue;
            out.insert(static_cast<int>(l));
            out.insert(static_cast<int>(-l));
        }
    }
    return out;
}

}  // namespace mwc
