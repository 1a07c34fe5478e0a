// SPDX-License-Identifier: Apache-2.0

#include "mwc/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwc/error.hpp"
#include "mwc/fft.hpp"

namespace mwc {
namespace {

using namespace std::complex_literals;

// Integer value of a ratio that is expected to be integral, or -1.
long long integral(double v)
{
    const double r = std::round(v);
    if (std::abs(v - r) > 1e-9 * std::max(1.0, std::abs(v))) return -1;
    return static_cast<long long>(r);
}

long long half_down(long long k) { return k / 2; }

// Passband bin range [lo, hi) of the q virtual slices for K bins per f_p.
std::pair<long long, long long> passband_bins(const std::vector<int>& shifts, long long K)
{
    return {shifts.front() * K - half_down(K), shifts.back() * K - half_down(K) + K};
}

// Projects x onto |f| <= band limit over the circular record. Content the
// grid carries above the band limit (ragged record ends, grid noise) would
// otherwise alias through high-order waveform harmonics.
std::vector<double> band_limited(const DenseSignal& x)
{
    const auto N = static_cast<long long>(x.samples.size());
    const double limit = x.band_limit();
    if (N == 0 || limit >= x.sample_rate_hz / 2.0) return x.samples;
    auto X = fft::forward(std::span<const double>(x.samples));
    const double bin = x.sample_rate_hz / static_cast<double>(N);
    for (long long b = 0; b < N; ++b) {
        const long long sb = b <= N / 2 ? b : b - N;
        if (std::abs(static_cast<double>(sb)) * bin > limit * (1.0 + 1e-12)) X[static_cast<std::size_t>(b)] = 0.0;
    }
    const auto t = fft::inverse(X);
    std::vector<double> out(static_cast<std::size_t>(N));
    for (long long n = 0; n < N; ++n) out[static_cast<std::size_t>(n)] = t[static_cast<std::size_t>(n)].real() / static_cast<double>(N);
    return out;
}

double passband_edge(const MwcConfig& c)
{
    const auto s = virtual_shifts(c.q);
    const int r = std::max(std::abs(s.front()), std::abs(s.back()));
    return (r + 0.5) * c.f_p;
}

}  // namespace

std::vector<int> virtual_shifts(int q)
{
    if (q < 1) throw InvalidConfig("collapsing factor q must be >= 1");
    std::vector<int> s;
    const int lo = -(q / 2);
    for (int k = 0; k < q; ++k) s.push_back(lo + k);
    return s;
}

int default_L(double f_max, double f_p, double f_s)
{
    const double need = (2.0 * f_max + f_s) / f_p;
    int L = static_cast<int>(std::ceil((need - 1.0) / 2.0 - 1e-12));
    return std::max(L, 0);
}

void check_structure(const MwcConfig& c)
{
    if (c.m < 1) throw InvalidConfig("m must be >= 1");
    if (c.q < 1) throw InvalidConfig("q must be >= 1");
    if (!(c.f_p > 0.0)) throw InvalidConfig("f_p must be positive");
    if (c.m_chips < 1) throw InvalidConfig("m_chips must be >= 1");
    if (c.L < 0) throw InvalidConfig("L must be non-negative");
    if (c.n_snapshots < 1) throw InvalidConfig("n_snapshots must be >= 1");
    if (c.f_s < c.q * c.f_p * (1.0 - 1e-12))
        throw InvalidConfig("f_s must be at least q * f_p to hold q virtual slices");
}

RateReport validate_config(const MwcConfig& c, const SignalScenario& s)
{
    check_structure(c);
    RateReport r;
    r.total_rate_hz = c.m * c.f_s;
    r.nyquist_rate_hz = nyquist_rate(s.f_max);
    r.ratio = r.total_rate_hz / r.nyquist_rate_hz;
    r.target_rate_hz = 4.0 * s.n_bands_max * s.band_width_max_hz;
    r.resolution_ge_bandwidth = c.f_p >= s.band_width_max_hz;
    r.rate_guidance_met = r.total_rate_hz >= r.target_rate_hz * (1.0 - 1e-12);
    r.basic_configuration = c.q == 1 && r.resolution_ge_bandwidth && c.f_s == c.f_p && c.m >= 4 * s.n_bands_max;
    r.chip_rate_covers_nyquist = c.chip_rate() >= r.nyquist_rate_hz;
    r.columns_cover_passband = c.columns() * c.f_p >= 2.0 * s.f_max + c.f_s;
    if (!r.resolution_ge_bandwidth) r.advisories.push_back("f_p < B: transmissions may span several slices");
    if (!r.rate_guidance_met) r.advisories.push_back("m * f_s below 4NB");
    if (c.q == 1 && c.m < 4 * s.n_bands_max) r.advisories.push_back("basic configuration wants m >= 4N");
    if (!r.chip_rate_covers_nyquist)
        r.advisories.push_back("chip rate m_chips * f_p below the Nyquist rate; high slices alias onto low ones");
    if (!r.columns_cover_passband)
        r.advisories.push_back("(2L + 1) f_p does not cover 2 f_max + f_s; some slices have no column");
    return r;
}

double default_grid_rate(const MwcConfig& c, double f_max)
{
    const double chip = c.chip_rate();
    const double need = std::max({2.16 * f_max, 2.0 * (f_max + passband_edge(c)), c.columns() * c.f_p});
    return chip * std::ceil(need / chip - 1e-12);
}

std::vector<double> render_antialiased(const ChipPattern& pattern, double grid_rate)
{
    const auto stair = render_dense(pattern, grid_rate);
    const auto P = static_cast<long long>(stair.size());
    auto D = fft::forward(std::span<const double>(stair));
    const double pi = std::numbers::pi;
    // The staircase's DFT equals the continuous coefficients times a pattern-
    // independent hold response; divide it out below the grid Nyquist.
    for (long long l = -(P - 1) / 2; l <= (P - 1) / 2; ++l) {
        if (l == 0) continue;
        const double x = 2.0 * pi * static_cast<double>(l) / static_cast<double>(P);
        const Complex hold = (1i * x) / (1.0 - std::polar(1.0, -x));
        D[fft::wrap(l, P)] /= hold;
    }
    if (P % 2 == 0) D[static_cast<std::size_t>(P / 2)] = 0.0;
    const auto t = fft::inverse(D);
    std::vector<double> out(stair.size());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = t[n].real() / static_cast<double>(P);
    return out;
}

ChannelSamples simulate_frontend(const DenseSignal& x, const WaveformBank& bank, const MwcConfig& c)
{
    check_structure(c);
    validate_bank(bank);
    if (static_cast<int>(bank.size()) != c.m) throw InvalidArgument("bank size differs from config.m");
    if (static_cast<int>(bank.chips_per_period()) != c.m_chips)
        throw InvalidArgument("bank chip count differs from config.m_chips");
    if (std::abs(bank.period_s() * c.f_p - 1.0) > 1e-9) throw InvalidArgument("bank period is not 1 / f_p");
    const double F = x.sample_rate_hz;
    const long long P = integral(F / c.f_p);
    if (P <= 0 || P % c.m_chips != 0)
        throw InvalidArgument("grid rate must be an integer multiple of the chip rate");
    const auto N = static_cast<long long>(x.samples.size());
    if (N == 0 || N % P != 0) throw InvalidArgument("record must span a whole number of waveform periods");
    if (F < 2.0 * (x.band_limit() + passband_edge(c)) * (1.0 - 1e-12))
        throw InvalidArgument("grid rate too low: mixer products would alias into the passband");
    const long long K = N / P;
    const long long n_out = integral(c.f_s * static_cast<double>(K) / c.f_p);
    if (n_out <= 0) throw InvalidArgument("record length gives a non-integer count of f_s samples");

    const auto shifts = virtual_shifts(c.q);
    const auto [lo, hi] = passband_bins(shifts, K);

    ChannelSamples out;
    out.rate_hz = c.f_s;
    out.channels.resize(static_cast<std::size_t>(c.m));
    const auto xs = band_limited(x);
    std::vector<double> prod(static_cast<std::size_t>(N));
    for (int i = 0; i < c.m; ++i) {
        const auto wave = render_antialiased(bank.patterns[static_cast<std::size_t>(i)], F);
        for (long long n = 0; n < N; ++n)
            prod[static_cast<std::size_t>(n)] = xs[static_cast<std::size_t>(n)] * wave[static_cast<std::size_t>(n % P)];
        const auto Y = fft::forward(std::span<const double>(prod));
        std::vector<Complex> spec(static_cast<std::size_t>(n_out), 0.0);
        for (long long b = lo; b < hi; ++b) spec[fft::wrap(b, n_out)] = Y[fft::wrap(b, N)];
        auto y = fft::inverse(spec);
        for (auto& v : y) v /= static_cast<double>(N);
        out.channels[static_cast<std::size_t>(i)] = std::move(y);
    }
    return out;
}

SampleMatrix expand_channels(const ChannelSamples& raw, const MwcConfig& c)
{
    check_structure(c);
    if (static_cast<int>(raw.channels.size()) != c.m) throw InvalidArgument("raw channel count differs from m");
    SampleMatrix sm;
    sm.f_p = c.f_p;
    sm.q = c.q;
    if (raw.channels.empty()) return sm;
    const auto len = static_cast<long long>(raw.channels.front().size());
    for (const auto& ch : raw.channels)
        if (static_cast<long long>(ch.size()) != len) throw InvalidArgument("raw channels differ in length");

    // Largest K (samples per virtual channel) whose raw length K f_s / f_p fits.
    long long K = static_cast<long long>(std::floor(static_cast<double>(len) * c.f_p / c.f_s + 1e-9));
    long long n_use = -1;
    for (; K > 0; --K) {
        n_use = integral(static_cast<double>(K) * c.f_s / c.f_p);
        if (n_use > 0 && n_use <= len) break;
    }
    if (K <= 0) throw InvalidArgument("raw record too short for one virtual sample");
    if (n_use < len)
        sm.diagnostics.push_back("dropped " + std::to_string(len - n_use) +
                                 " trailing raw samples not forming a whole virtual sample");

    const auto shifts = virtual_shifts(c.q);
    sm.rows.resize(c.m * c.q, K);
    for (int i = 0; i < c.m; ++i) {
        const auto& ch = raw.channels[static_cast<std::size_t>(i)];
        const auto R = fft::forward(std::span<const Complex>(ch.data(), static_cast<std::size_t>(n_use)));
        for (std::size_t k = 0; k < shifts.size(); ++k) {
            const long long r = shifts[k];
            std::vector<Complex> v(static_cast<std::size_t>(K));
            const long long start = r * K - half_down(K);
            for (long long b = start; b < start + K; ++b) v[fft::wrap(b - r * K, K)] = R[fft::wrap(b, n_use)];
            const auto t = fft::inverse(v);
            const auto row = static_cast<Eigen::Index>(i * c.q + static_cast<int>(k));
            for (long long n = 0; n < K; ++n) sm.rows(row, n) = t[static_cast<std::size_t>(n)] / static_cast<double>(n_use);
        }
    }
    return sm;
}

CMatrix slice_oracle(const DenseSignal& x, double f_p, int L, int n_snapshots)
{
    if (!(f_p > 0.0) || L < 0) throw InvalidArgument("slice_oracle needs f_p > 0 and L >= 0");
    const double F = x.sample_rate_hz;
    const long long P = integral(F / f_p);
    const auto N = static_cast<long long>(x.samples.size());
    if (P <= 0 || N == 0 || N % P != 0) throw InvalidArgument("record must span a whole number of periods 1/f_p");
    if ((L + 0.5) * f_p > F / 2.0 * (1.0 + 1e-12)) throw InvalidArgument("grid does not resolve slice L");
    const long long K = N / P;
    const auto xs = band_limited(x);
    const auto X = fft::forward(std::span<const double>(xs));
    const long long keep = n_snapshots > 0 ? std::min<long long>(n_snapshots, K) : K;
    CMatrix z(2 * L + 1, keep);
    std::vector<Complex> v(static_cast<std::size_t>(K));
    for (int l = -L; l <= L; ++l) {
        const long long start = l * K - half_down(K);
        for (long long b = start; b < start + K; ++b) v[fft::wrap(b - l * K, K)] = X[fft::wrap(b, N)];
        const auto t = fft::inverse(v);
        for (long long n = 0; n < keep; ++n) z(l + L, n) = t[static_cast<std::size_t>(n)] / static_cast<double>(N);
    }
    return z;
}

}  // namespace mwc
