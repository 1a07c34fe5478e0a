// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwc/ctf.hpp"
#include "mwc/frontend.hpp"
#include "mwc/reconstruction.hpp"
#include "mwc/sensing_matrix.hpp"
#include "mwc/serialization.hpp"
#include "mwc/signal_model.hpp"
#include "mwc/waveform.hpp"

namespace mwc {

/// How to build the waveform bank for a run.
struct BankSpec {
    BankDerivation mode = BankDerivation::independent_random;
    std::uint64_t seed = 1;
    std::optional<ChipPattern> base;  ///< tapped_register only
    std::vector<std::size_t> taps;    ///< tapped_register only
};

void to_json(Json& j, const BankSpec& b);
void from_json(const Json& j, BankSpec& b);

/// Builds a bank matching config.m and config.m_chips. For tapped_register without
/// an explicit base, the base pattern is drawn from the seed and taps default to
/// 0, s, 2s, ... with s = m_chips / m.
WaveformBank make_bank(const BankSpec& spec, const MwcConfig& config);

/// Scenario duration rounded to whole waveform periods; n_snapshots periods when unset.
double record_duration(const SignalScenario& scenario, const MwcConfig& config);

struct Acquisition {
    SignalScenario scenario;  ///< with the effective duration filled in
    double grid_rate_hz = 0.0;
    DenseSignal x;
    ChannelSamples raw;
    SampleMatrix samples;
    SensingMatrix C;
};

/// Synthesis, front-end simulation and expansion. grid_rate_hz = 0 selects the default grid.
Acquisition acquire(const SignalScenario& scenario, const MwcConfig& config, const WaveformBank& bank,
                    double grid_rate_hz = 0.0);

/// Solver sparsity used when none is given: min(2N, rows, 2L + 1), since each of the N intervals can straddle one slice boundary.
int default_sparsity(const SignalScenario& scenario, const MwcConfig& config);

struct SensingOptions {
    DetectOptions detect;
    CarrierOptions carriers;
    int sparsity = -1;  ///< negative: default_sparsity
};

struct SensingTimes {
    double detect_s = 0.0;
    double recover_s = 0.0;
    double carriers_s = 0.0;
    double sensing_s() const { return detect_s + recover_s + carriers_s; }
};

/// Support detection, hole map, slice recovery and carrier estimation on one sample matrix.
RecoveryResult sense(const SampleMatrix& samples, const SensingMatrix& C, int sparsity,
                     const SensingOptions& options, SensingTimes* times = nullptr);

}  // namespace mwc
