// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "mwc/frontend.hpp"
#include "mwc/types.hpp"
#include "mwc/waveform.hpp"

namespace mwc {

/// Measurement matrix of y[n] = C z[n]: rows follow SampleMatrix ordering,
/// column j holds slice l = j - L.
struct SensingMatrix {
    CMatrix entries;
    int m = 0;
    int q = 1;
    int L = 0;
    double f_p = 0.0;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
    int column_of(int l) const { return l + L; }
    int slice_of(Eigen::Index column) const { return static_cast<int>(column) - L; }
};

/// Row (i, r), column l holds c_{i, r - l}.
///
/// Slice l sits around +l f_p, and mixing with e^{+j 2 pi k f_p t} moves it to
/// (l + k) f_p, so the coefficient that brings it onto virtual shift r is k = r - l.
/// For q = 1 and a real pattern this is conj(c_{i,l}).
SensingMatrix build_matrix(const WaveformBank& bank, const MwcConfig& config);

/// The closed slice interval [l f_p - f_p/2, l f_p + f_p/2].
Interval column_frequency(int l, double f_p, int L);

struct ConditioningReport {
    double mutual_coherence = 0.0;
    int coherence_pair[2] = {0, 0};  ///< slice indices of the most coherent columns
    bool coherence_flag = false;     ///< coherence within 1e-9 of 1 (dependent columns)
    int rank = 0;
    double largest_singular = 0.0;
    double smallest_singular = 0.0;
    int subset_size = 0;
    int subsets_sampled = 0;
    double min_subset_singular = 0.0;   ///< smallest sigma_min over sampled column subsets
    double median_subset_singular = 0.0;
};

ConditioningReport conditioning_report(const SensingMatrix& C, int subset_size, int samples = 200,
                                       std::uint64_t seed = 1);

}  // namespace mwc
