// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mwc/types.hpp"

namespace mwc {

/// One period of a sign-alternating mixing waveform: chip k is held on
/// [k T_p / M, (k + 1) T_p / M).
struct ChipPattern {
    std::vector<int> chips;  ///< each +1 or -1
    double period_s = 1.0;

    std::size_t size() const noexcept { return chips.size(); }
    bool operator==(const ChipPattern&) const = default;
};

enum class BankDerivation { independent_random, tapped_register };

struct WaveformBank {
    std::vector<ChipPattern> patterns;
    BankDerivation derivation = BankDerivation::independent_random;
    std::optional<std::uint64_t> seed;      ///< independent_random
    std::optional<ChipPattern> base;        ///< tapped_register
    std::vector<std::size_t> taps;          ///< tapped_register

    std::size_t size() const noexcept { return patterns.size(); }
    std::size_t chips_per_period() const { return patterns.empty() ? 0 : patterns.front().size(); }
    double period_s() const { return patterns.empty() ? 0.0 : patterns.front().period_s; }
};

/// Throws InvalidArgument unless every chip is +-1 and the period is positive.
void validate_pattern(const ChipPattern& p);
/// Throws InvalidArgument unless patterns share length and period (and taps agree).
void validate_bank(const WaveformBank& bank);

WaveformBank gen_random_bank(std::size_t m, std::size_t m_chips, std::uint64_t seed, double period_s = 1.0);

/// Pattern i is `base` rotated left by taps[i]: out[k] = base[(k + taps[i]) mod M].
WaveformBank gen_tapped_bank(const ChipPattern& base, const std::vector<std::size_t>& taps);

/// Exact Fourier-series coefficient c_l = (1/T_p) int_0^T_p p(t) e^{-j 2 pi l t / T_p} dt.
Complex fourier_coeff(const ChipPattern& pattern, long l);

/// Coefficients for l = -L..L, index l + L.
std::vector<Complex> fourier_coeffs(const ChipPattern& pattern, int L);

/// Piecewise-constant rendering of one period on a grid of `grid_rate` samples/s.
std::vector<double> render_dense(const ChipPattern& pattern, double grid_rate);

}  // namespace mwc
