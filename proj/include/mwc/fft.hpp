// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "mwc/types.hpp"

namespace mwc::fft {

/// Unnormalized forward DFT: X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
std::vector<Complex> forward(std::span<const Complex> x);
std::vector<Complex> forward(std::span<const double> x);

/// Unnormalized inverse DFT: x[n] = sum_k X[k] e^{+j 2 pi k n / N}. No 1/N factor.
std::vector<Complex> inverse(std::span<const Complex> X);

/// Maps a signed bin index onto [0, n).
inline std::size_t wrap(long long bin, std::size_t n)
{
    const auto nn = static_cast<long long>(n);
    long long r = bin % nn;
    if (r < 0) r += nn;
    return static_cast<std::size_t>(r);
}

}  // namespace mwc::fft
