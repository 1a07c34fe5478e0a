// SPDX-License-Identifier: Apache-2.0
//
// Reference computations written independently of the library's code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mwc/types.hpp"
#include "mwc/waveform.hpp"

namespace oracle {

using mwc::CMatrix;
using mwc::Complex;

inline constexpr double kPi = std::numbers::pi;

/// Direct O(N) evaluation of one DFT bin: X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
template <typename T>
Complex dft_bin(const std::vector<T>& x, long long k)
{
    const auto N = static_cast<long long>(x.size());
    Complex acc = 0.0;
    for (long long n = 0; n < N; ++n) {
        const double ph = -2.0 * kPi * static_cast<double>((k % N + N) % N * n % N) / static_cast<double>(N);
        acc += Complex(x[static_cast<std::size_t>(n)]) * std::polar(1.0, ph);
    }
    return acc;
}

template <typename T>
std::vector<Complex> naive_dft(const std::vector<T>& x)
{
    std::vector<Complex> X(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) X[k] = dft_bin(x, static_cast<long long>(k));
    return X;
}

/// Fourier coefficient of a chip waveform as the sum of exact per-chip integrals:
/// (1/T) int_{kT/M}^{(k+1)T/M} e^{-j 2 pi l t / T} dt.
inline Complex chip_integral_coeff(const mwc::ChipPattern& p, long l)
{
    const auto M = static_cast<double>(p.size());
    Complex acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double a = static_cast<double>(k) / M;
        const double b = static_cast<double>(k + 1) / M;
        Complex seg;
        if (l == 0) {
            seg = b - a;
        } else {
            const Complex w(0.0, -2.0 * kPi * static_cast<double>(l));
            seg = (std::exp(w * b) - std::exp(w * a)) / w;
        }
        acc += static_cast<double>(p.chips[k]) * seg;
    }
    return acc;
}

/// Numerical mid-point integration of the coefficient, for cross-checking.
inline Complex midpoint_coeff(const mwc::ChipPattern& p, long l, int per_chip = 64)
{
    const auto M = static_cast<int>(p.size());
    const int n = M * per_chip;
    Complex acc = 0.0;
    for (int s = 0; s < n; ++s) {
        const double t = (s + 0.5) / n;
        acc += static_cast<double>(p.chips[static_cast<std::size_t>(s / per_chip)]) *
               std::polar(1.0, -2.0 * kPi * static_cast<double>(l) * t);
    }
    return acc / static_cast<double>(n);
}

/// Exhaustive minimal-residual row support of size k for V = C U.
struct Exhaustive {
    std::vector<int> support;
    double residual = 0.0;
};

inline double ls_residual(const CMatrix& C, const CMatrix& V, const std::vector<int>& cols)
{
    CMatrix A(C.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = C.col(cols[j]);
    const CMatrix X = A.completeOrthogonalDecomposition().solve(V);
    return (V - A * X).norm();
}

inline Exhaustive exhaustive_search(const CMatrix& C, const CMatrix& V, int k)
{
    Exhaustive best;
    best.residual = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(C.cols());
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            const double r = ls_residual(C, V, idx);
            if (r < best.residual) {
                best.residual = r;
                best.support = idx;
            }
            return;
        }
        for (int j = start; j <= n - (k - depth); ++j) {
            idx[static_cast<std::size_t>(depth)] = j;
            rec(j + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = Complex(g(rng), g(rng));
    return A;
}

inline double rel_err(const CMatrix& a, const CMatrix& b)
{
    const double d = b.norm();
    return d == 0.0 ? a.norm() : (a - b).norm() / d;
}

}  // namespace oracle
