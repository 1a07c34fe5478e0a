// SPDX-License-Identifier: Apache-2.0

#include "mwc/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "mwc/error.hpp"

namespace mwc {

void validate_pattern(const ChipPattern& p)
{
    if (p.chips.empty()) throw InvalidArgument("chip pattern must have at least one chip");
    if (!(p.period_s > 0.0)) throw InvalidArgument("chip pattern period must be positive");
    for (int c : p.chips)
        if (c != 1 && c != -1) throw InvalidArgument("chips must be +1 or -1");
}

void validate_bank(const WaveformBank& bank)
{
    if (bank.patterns.empty()) throw InvalidArgument("waveform bank is empty");
    for (const auto& p : bank.patterns) {
        validate_pattern(p);
        if (p.size() != bank.patterns.front().size() || p.period_s != bank.patterns.front().period_s)
            throw InvalidArgument("all patterns in a bank must share chip count and period");
    }
    if (bank.derivation == BankDerivation::tapped_register) {
        if (!bank.base || bank.taps.size() != bank.patterns.size())
            throw InvalidArgument("tapped bank needs a base pattern and one tap per pattern");
    }
}

WaveformBank gen_random_bank(std::size_t m, std::size_t m_chips, std::uint64_t seed, double period_s)
{
    if (m < 1 || m_chips < 1) throw InvalidArgument("gen_random_bank needs m >= 1 and m_chips >= 1");
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x62616e6bU};
    std::mt19937_64 rng(seq);
    WaveformBank bank;
    bank.derivation = BankDerivation::independent_random;
    bank.seed = seed;
    bank.patterns.resize(m);
    for (auto& p : bank.patterns) {
        p.period_s = period_s;
        p.chips.resize(m_chips);
        for (auto& c : p.chips) c = (rng() >> 63) ? 1 : -1;
    }
    return bank;
}

WaveformBank gen_tapped_bank(const ChipPattern& base, const std::vector<std::size_t>& taps)
{
    validate_pattern(base);
    if (taps.empty()) throw InvalidArgument("tapped bank needs at least one tap");
    std::set<std::size_t> seen;
    for (auto t : taps) {
        if (t >= base.size()) throw InvalidArgument("tap offset outside [0, M_chips)");
        if (!seen.insert(t).second) throw InvalidArgument("duplicate tap offset " + std::to_string(t));
    }
    WaveformBank bank;
    bank.derivation = BankDerivation::tapped_register;
    bank.base = base;
    bank.taps = taps;
    for (auto t : taps) {
        ChipPattern p{base.chips, base.period_s};
        std::rotate(p.chips.begin(), p.chips.begin() + static_cast<std::ptrdiff_t>(t), p.chips.end());
        bank.patterns.push_back(std::move(p));
    }
    return bank;
}

Complex fourier_coeff(const ChipPattern& pattern, long l)
{
    using namespace std::complex_literals;
    const auto M = static_cast<long>(pattern.size());
    const double pi = std::numbers::pi;
    // Chip DFT sum_k a_k e^{-j 2 pi l k / M}; l only matters modulo M here.
    const long lm = ((l % M) + M) % M;
    Complex dft = 0.0;
    for (long k = 0; k < M; ++k) {
        const double ang = -2.0 * pi * static_cast<double>((lm * k) % M) / static_cast<double>(M);
        dft += static_cast<double>(pattern.chips[static_cast<std::size_t>(k)]) * std::polar(1.0, ang);
    }
    if (l == 0) return dft / static_cast<double>(M);
    const double x = 2.0 * pi * static_cast<double>(lm) / static_cast<double>(M);
    const Complex d = (1.0 - std::polar(1.0, -x)) / (1i * 2.0 * pi * static_cast<double>(l));
    return d * dft;
}

std::vector<Complex> fourier_coeffs(const ChipPattern& pattern, int L)
{
    if (L < 0) throw InvalidArgument("L must be non-negative");
    validate_pattern(pattern);
    std::vector<Complex> c(static_cast<std::size_t>(2 * L + 1));
    for (int l = -L; l <= L; ++l) c[static_cast<std::size_t>(l + L)] = fourier_coeff(pattern, l);
    return c;
}

std::vector<double> render_dense(const ChipPattern& pattern, double grid_rate)
{
    validate_pattern(pattern);
    const double per_period = grid_rate * pattern.period_s;
    const double samples_per_chip = per_period / static_cast<double>(pattern.size());
    const double rounded = std::round(samples_per_chip);
    if (rounded < 1.0 || std::abs(samples_per_chip - rounded) > 1e-9 * std::max(1.0, samples_per_chip))
        throw InvalidArgument("grid rate does not place an integer number of samples on each chip");
    const auto k = static_cast<std::size_t>(rounded);
    std::vector<double> out;
    out.reserve(k * pattern.size());
    for (int c : pattern.chips) out.insert(out.end(), k, static_cast<double>(c));
    return out;
}

}  // namespace mwc
