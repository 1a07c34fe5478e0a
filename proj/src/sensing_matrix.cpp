// SPDX-License-Identifier: Apache-2.0

#include "mwc/sensing_matrix.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "mwc/error.hpp"

namespace mwc {

SensingMatrix build_matrix(const WaveformBank& bank, const MwcConfig& c)
{
    check_structure(c);
    validate_bank(bank);
    if (static_cast<int>(bank.size()) != c.m) throw InvalidArgument("bank size differs from config.m");
    const auto shifts = virtual_shifts(c.q);
    SensingMatrix C;
    C.m = c.m;
    C.q = c.q;
    C.L = c.L;
    C.f_p = c.f_p;
    C.entries.resize(c.m * c.q, 2 * c.L + 1);
    for (int i = 0; i < c.m; ++i) {
        const auto& pat = bank.patterns[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < shifts.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(i * c.q + static_cast<int>(k));
            for (int l = -c.L; l <= c.L; ++l) C.entries(row, l + c.L) = fourier_coeff(pat, shifts[k] - l);
        }
    }
    return C;
}

Interval column_frequency(int l, double f_p, int L)
{
    if (l < -L || l > L) throw InvalidArgument("slice index outside [-L, L]");
    return {l * f_p - f_p / 2.0, l * f_p + f_p / 2.0};
}

ConditioningReport conditioning_report(const SensingMatrix& C, int subset_size, int samples, std::uint64_t seed)
{
    ConditioningReport r;
    const auto& A = C.entries;
    const Eigen::Index n = A.cols();
    if (A.size() == 0) return r;

    Eigen::VectorXd norms = A.colwise().norm().transpose();
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            if (norms(a) == 0.0 || norms(b) == 0.0) continue;
            const double mu = std::abs(A.col(a).dot(A.col(b))) / (norms(a) * norms(b));
            if (mu > r.mutual_coherence) {
                r.mutual_coherence = mu;
                r.coherence_pair[0] = C.slice_of(a);
                r.coherence_pair[1] = C.slice_of(b);
            }
        }
    }
    r.coherence_flag = r.mutual_coherence > 1.0 - 1e-9;

    Eigen::JacobiSVD<CMatrix> svd(A);
    const auto& sv = svd.singularValues();
    r.largest_singular = sv.size() ? sv(0) : 0.0;
    r.smallest_singular = sv.size() ? sv(sv.size() - 1) : 0.0;
    const double tol = std::max(A.rows(), A.cols()) * std::numeric_limits<double>::epsilon() * r.largest_singular;
    r.rank = static_cast<int>((sv.array() > tol).count());

    subset_size = std::clamp<int>(subset_size, 0, static_cast<int>(n));
    r.subset_size = subset_size;
    if (subset_size == 0 || samples <= 0) return r;
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> mins;
    for (int s = 0; s < samples; ++s) {
        std::shuffle(idx.begin(), idx.end(), rng);
        CMatrix sub(A.rows(), subset_size);
        for (int k = 0; k < subset_size; ++k) sub.col(k) = A.col(idx[static_cast<std::size_t>(k)]) / norms(idx[static_cast<std::size_t>(k)]);
        Eigen::JacobiSVD<CMatrix> s2(sub);
        const auto& v = s2.singularValues();
        // Fewer rows than columns means the subset is necessarily rank deficient.
        mins.push_back(subset_size > A.rows() ? 0.0 : v(v.size() - 1));
    }
    std::ranges::sort(mins);
    r.subsets_sampled = samples;
    r.min_subset_singular = mins.front();
    r.median_subset_singular = mins[mins.size() / 2];
    return r;
}

}  // namespace mwc
