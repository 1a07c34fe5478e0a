// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mwc/signal_model.hpp"
#include "mwc/types.hpp"
#include "mwc/waveform.hpp"

namespace mwc {

/// MWC front-end parameters.
///
/// Each of the m physical channels is sampled at f_s >= q f_p and digitally
/// expanded into q virtual channels at rate f_p. The analog lowpass passes
/// exactly the q slices the expansion uses.
struct MwcConfig {
    int m = 4;
    int q = 1;
    double f_p = 20e6;
    double f_s = 20e6;
    int m_chips = 108;
    int L = 55;
    int n_snapshots = 64;

    double period_s() const { return 1.0 / f_p; }
    double chip_rate() const { return static_cast<double>(m_chips) * f_p; }
    int virtual_rows() const { return m * q; }
    int columns() const { return 2 * L + 1; }
};

/// The q virtual shifts r: centered on zero; for even q the extra one is negative.
std::vector<int> virtual_shifts(int q);

/// Smallest L with (2L + 1) f_p >= 2 f_max + f_s.
int default_L(double f_max, double f_p, double f_s);

/// Throws InvalidConfig on structural problems (f_s < q f_p, non-positive sizes, ...).
void check_structure(const MwcConfig& config);

struct RateReport {
    double total_rate_hz = 0.0;   ///< m f_s
    double nyquist_rate_hz = 0.0; ///< 2 f_max
    double ratio = 0.0;           ///< total / Nyquist
    double target_rate_hz = 0.0;  ///< 4 N B
    bool basic_configuration = false;  ///< q = 1, f_p >= B, T_s = T_p, m >= 4N
    bool rate_guidance_met = false;    ///< m f_s >= 4 N B
    bool resolution_ge_bandwidth = false;
    bool chip_rate_covers_nyquist = false;
    bool columns_cover_passband = false;
    std::vector<std::string> advisories;
};

/// Rate accounting and basic-configuration guidance. Only structural errors throw.
RateReport validate_config(const MwcConfig& config, const SignalScenario& scenario);

/// Dense-grid rate for a scenario: the smallest multiple of the chip rate that is
/// at least 2.16 f_max, keeps the mixer products alias-free and resolves every
/// slice column.
double default_grid_rate(const MwcConfig& config, double f_max);

/// Raw ADC output of every physical channel at rate f_s.
struct ChannelSamples {
    double rate_hz = 0.0;
    std::vector<std::vector<Complex>> channels;
};

/// Virtual-channel measurements y[n] at rate f_p. Row i * q + k holds physical
/// channel i demodulated by shift virtual_shifts(q)[k].
struct SampleMatrix {
    CMatrix rows;
    double f_p = 0.0;
    int q = 1;
    std::string ordering = "channel-major/shift-minor";
    std::vector<std::string> diagnostics;

    Eigen::Index row_count() const { return rows.rows(); }
    Eigen::Index snapshots() const { return rows.cols(); }
};

/// Mixing waveform as seen by a grid sampler: the Fourier series of `pattern`
/// truncated to the grid's Nyquist band, one period long.
std::vector<double> render_antialiased(const ChipPattern& pattern, double grid_rate);

/// Mix with each bank waveform, ideal lowpass (FFT mask over the record) and
/// decimate to f_s. The record is treated as one period of a circular signal and
/// is first projected onto |f| <= x.band_limit().
ChannelSamples simulate_frontend(const DenseSignal& x, const WaveformBank& bank, const MwcConfig& config);

/// Expand each physical channel into q virtual channels at rate f_p.
SampleMatrix expand_channels(const ChannelSamples& raw, const MwcConfig& config);

/// Spectral slices z_l[n], l = -L..L (row l + L): the f_p-wide band around l f_p,
/// demodulated to baseband and sampled at f_p. Slice l owns the half-open bin
/// range starting at l K - floor(K/2) where K is the number of record bins per f_p.
/// Uses the same band-limit projection as simulate_frontend.
/// n_snapshots = 0 keeps every sample.
CMatrix slice_oracle(const DenseSignal& x, double f_p, int L, int n_snapshots = 0);

}  // namespace mwc
