// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwc/ctf.hpp"
#include "mwc/frontend.hpp"
#include "mwc/reconstruction.hpp"
#include "mwc/sensing_matrix.hpp"
#include "mwc/signal_model.hpp"
#include "mwc/waveform.hpp"

namespace mwc {

using Json = nlohmann::json;

// JSON field names follow the C++ member names.
void to_json(Json& j, const ModParams& p);
void from_json(const Json& j, ModParams& p);
void to_json(Json& j, const BandSpec& b);
void from_json(const Json& j, BandSpec& b);
void to_json(Json& j, const SignalScenario& s);
void from_json(const Json& j, SignalScenario& s);
void to_json(Json& j, const ChipPattern& p);
void from_json(const Json& j, ChipPattern& p);
void to_json(Json& j, const WaveformBank& b);
void from_json(const Json& j, WaveformBank& b);
void to_json(Json& j, const MwcConfig& c);
void from_json(const Json& j, MwcConfig& c);
void to_json(Json& j, const RateReport& r);
void to_json(Json& j, const SupportSet& s);
void from_json(const Json& j, SupportSet& s);
void to_json(Json& j, const Interval& iv);
void to_json(Json& j, const HoleMap& h);
void to_json(Json& j, const CtfDiagnostics& d);
void to_json(Json& j, const DetectOptions& o);
void from_json(const Json& j, DetectOptions& o);
void to_json(Json& j, const CarrierEstimate& c);
void to_json(Json& j, const SliceSet& s);
void to_json(Json& j, const RecoveryResult& r);
void to_json(Json& j, const SampleMatrix& m);

/// Scenario parsing that reports every problem with a field path instead of
/// stopping at the first type error. Throws InvalidScenario.
SignalScenario parse_scenario(const Json& j);

/// Ordering tags of the binary matrix format.
enum class MatrixOrdering : std::uint32_t { channel_major_shift_minor = 0, slice_columns = 1 };

/// Little-endian binary matrix: uint64 rows, uint64 cols, float64 f_p,
/// uint32 ordering tag, then rows * cols (re, im) float64 pairs in row-major order.
void write_matrix_binary(std::ostream& os, const CMatrix& m, double f_p, MatrixOrdering tag);
struct BinaryMatrix {
    CMatrix data;
    double f_p = 0.0;
    MatrixOrdering ordering = MatrixOrdering::channel_major_shift_minor;
};
BinaryMatrix read_matrix_binary(std::istream& is);

void write_samples_binary(std::ostream& os, const SampleMatrix& m);
SampleMatrix read_samples_binary(std::istream& is);
void write_sensing_binary(std::ostream& os, const SensingMatrix& C);
Json sensing_metadata(const SensingMatrix& C, const WaveformBank& bank);

/// Little-endian: uint64 count, float64 rate, float64 t0, float64 f_max, samples.
void write_dense_binary(std::ostream& os, const DenseSignal& x);
DenseSignal read_dense_binary(std::istream& is);

/// 16-bit PCM mono RIFF/WAVE, peak-normalized.
void write_wav(std::ostream& os, const std::vector<double>& samples, std::uint32_t sample_rate);

/// "start_hz,end_hz" header plus one line per hole.
std::string holes_csv(const HoleMap& holes);

/// FNV-1a 64-bit digest of the binary sample encoding, as 16 hex digits.
std::string digest(const SampleMatrix& m);
std::string digest_bytes(const std::string& bytes);

}  // namespace mwc
