// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwc/error.hpp"
#include "mwc/types.hpp"

namespace mwc {

enum class Modulation { pure_sine, am, fm };

std::string to_string(Modulation m);
Modulation modulation_from_string(const std::string& s);

struct ModParams {
    double envelope_hz = 0.0;   ///< AM envelope rate
    double depth = 0.5;         ///< AM modulation index d
    double deviation_hz = 0.0;  ///< FM peak deviation
    double rate_hz = 0.0;       ///< FM modulating tone rate
};

/// One transmission of the multiband input.
///
/// The occupied interval is [carrier - bandwidth/2, carrier + bandwidth/2] (and its
/// mirror image on the negative axis). A pure_sine occupies a single point.
/// When phase_rad is unset the initial phase is drawn from the scenario seed and a
/// hash of the band's parameters, so that it does not depend on list position.
struct BandSpec {
    double carrier_hz = 0.0;
    double bandwidth_hz = 0.0;
    double amplitude = 1.0;
    Modulation modulation = Modulation::pure_sine;
    ModParams mod_params;
    std::optional<double> phase_rad;

    double occupied_width() const { return modulation == Modulation::pure_sine ? 0.0 : bandwidth_hz; }
};

/// Carson-rule bandwidth 2 (deviation + rate) of a sinusoidal FM transmission.
double carson_bandwidth(double deviation_hz, double rate_hz);

/// Declarative sparse multiband input.
///
/// n_bands_max counts spectral intervals (a real transmission uses two: its
/// positive and negative images), so at most n_bands_max / 2 bands are allowed.
struct SignalScenario {
    double f_max = 0.0;
    int n_bands_max = 0;
    double band_width_max_hz = 0.0;
    std::vector<BandSpec> bands;
    double duration_s = 0.0;
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
};

/// Dense-grid stand-in for the continuous input x(t).
struct DenseSignal {
    double sample_rate_hz = 0.0;
    std::vector<double> samples;
    double t0 = 0.0;
    /// Band limit of the signal content; 0 means "unknown", i.e. up to sample_rate/2.
    /// Additive grid noise is white up to sample_rate/2 regardless.
    double f_max_hz = 0.0;

    double band_limit() const { return f_max_hz > 0.0 ? f_max_hz : sample_rate_hz / 2.0; }
};

double nyquist_rate(double f_max);

/// Returns every invariant violation instead of throwing.
std::vector<FieldError> check_scenario(const SignalScenario& scenario);
/// Throws InvalidScenario listing all failing fields.
void validate_scenario(const SignalScenario& scenario);

/// Samples of the scenario on a uniform grid of rate grid_rate over duration_s.
///
/// Deterministic in scenario.seed. White Gaussian noise is added when snr_db is
/// set, scaled against the total signal power of the record.
DenseSignal synthesize(const SignalScenario& scenario, double grid_rate);

/// Noise-free component of synthesize(), for SNR bookkeeping in tests and reports.
DenseSignal synthesize_clean(const SignalScenario& scenario, double grid_rate);

/// Slice indices in [-L, L] whose closed slice interval touches any occupied band.
SupportSet true_support(const SignalScenario& scenario, double f_p, int L);

/// Initial phase the synthesizer assigns to `band` under `seed`.
double band_phase(const BandSpec& band, std::uint64_t seed);

}  // namespace mwc
