// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "mwc/ctf.hpp"
#include "mwc/frontend.hpp"
#include "mwc/sensing_matrix.hpp"
#include "mwc/signal_model.hpp"

namespace mwc {

/// Recovered slice sequences z_l[n] at rate f_p, keyed by slice index.
struct SliceSet {
    double f_p = 0.0;
    std::map<int, std::vector<Complex>> slices;

    std::size_t length() const { return slices.empty() ? 0 : slices.begin()->second.size(); }
};

/// z_S[n] = pinv(C_S) y[n]. Throws ReconstructionIllPosed when C_S lacks full column rank.
SliceSet recover_slices(const SampleMatrix& samples, const SensingMatrix& C, const SupportSet& support);

/// Oracle-side counterpart: picks the rows of a slice_oracle() matrix.
SliceSet slices_from_oracle(const CMatrix& z, double f_p, int L, const SupportSet& support);

/// Interpolates every slice onto the dense grid, remodulates it to l f_p and sums.
DenseSignal reconstruct_signal(const SliceSet& slices, double grid_rate, double duration_s);

/// Contiguous runs of non-negative support indices.
std::vector<std::vector<int>> positive_groups(const SupportSet& support);

/// A run of adjacent slices stitched in frequency into one complex baseband
/// signal. Sample n sits at time n / rate_hz; frequency 0 maps to f_lo_hz.
struct StitchedBand {
    double f_lo_hz = 0.0;
    double rate_hz = 0.0;
    std::vector<Complex> samples;
};

StitchedBand stitch_group(const SliceSet& slices, const std::vector<int>& group);

struct CarrierEstimate {
    std::vector<int> slices;
    double frequency_hz = 0.0;
    std::string method;  ///< "peak" or "centroid"
    double occupied_hz = 0.0;
};

struct CarrierOptions {
    std::size_t min_fft = 1u << 14;
    double occupancy_db = 20.0;     ///< extent threshold below the spectral peak
    double spread_bins = 8.0;       ///< extents wider than this many record bins use the centroid
};

struct CarrierReport {
    std::vector<CarrierEstimate> carriers;
    std::vector<std::string> diagnostics;
};

/// Per positive slice group: Hann-windowed zero-padded periodogram of the stitched
/// band. Narrow groups report the quadratically interpolated peak; groups whose
/// occupied extent is wide (FM) report the power centroid over that extent.
CarrierReport estimate_carriers(const SliceSet& slices, const SupportSet& support, const CarrierOptions& options = {});

/// Magnitude of a stitched band: the envelope of an AM transmission.
std::vector<double> envelope(const StitchedBand& band);

/// Pearson correlation of two equally long sequences.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

struct RecoveryResult {
    SupportSet support;
    HoleMap holes;
    SliceSet slices;
    std::vector<CarrierEstimate> carriers;
    CtfDiagnostics diagnostics;
    std::vector<std::string> notes;
};

}  // namespace mwc
