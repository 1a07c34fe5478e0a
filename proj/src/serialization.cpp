// SPDX-License-Identifier: Apache-2.0

#include "mwc/serialization.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "mwc/error.hpp"

namespace mwc {
namespace {

template <typename T>
void put(std::ostream& os, T v)
{
    static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw InvalidArgument("truncated binary stream");
    return v;
}

std::string derivation_name(BankDerivation d)
{
    return d == BankDerivation::tapped_register ? "tapped_register" : "independent_random";
}

}  // namespace

void to_json(Json& j, const ModParams& p)
{
    j = Json{{"envelope_hz", p.envelope_hz}, {"depth", p.depth}, {"deviation_hz", p.deviation_hz}, {"rate_hz", p.rate_hz}};
}

void from_json(const Json& j, ModParams& p)
{
    p.envelope_hz = j.value("envelope_hz", 0.0);
    p.depth = j.value("depth", 0.5);
    p.deviation_hz = j.value("deviation_hz", 0.0);
    p.rate_hz = j.value("rate_hz", 0.0);
}

void to_json(Json& j, const BandSpec& b)
{
    j = Json{{"carrier_hz", b.carrier_hz},      {"bandwidth_hz", b.bandwidth_hz},
             {"amplitude", b.amplitude},        {"modulation", to_string(b.modulation)},
             {"mod_params", b.mod_params}};
    if (b.phase_rad) j["phase_rad"] = *b.phase_rad;
}

void from_json(const Json& j, BandSpec& b)
{
    b.carrier_hz = j.at("carrier_hz").get<double>();
    b.bandwidth_hz = j.value("bandwidth_hz", 0.0);
    b.amplitude = j.value("amplitude", 1.0);
    b.modulation = modulation_from_string(j.value("modulation", std::string("pure_sine")));
    if (j.contains("mod_params")) b.mod_params = j.at("mod_params").get<ModParams>();
    if (j.contains("phase_rad") && !j.at("phase_rad").is_null()) b.phase_rad = j.at("phase_rad").get<double>();
}

void to_json(Json& j, const SignalScenario& s)
{
    j = Json{{"f_max", s.f_max},
             {"n_bands_max", s.n_bands_max},
             {"band_width_max_hz", s.band_width_max_hz},
             {"bands", s.bands},
             {"duration_s", s.duration_s},
             {"snr_db", s.snr_db ? Json(*s.snr_db) : Json(nullptr)},
             {"seed", s.seed}};
}

void from_json(const Json& j, SignalScenario& s) { s = parse_scenario(j); }

SignalScenario parse_scenario(const Json& j)
{
    std::vector<FieldError> errs;
    SignalScenario s;
    if (!j.is_object()) throw InvalidScenario(std::vector<FieldError>{{"", "scenario must be a JSON object"}});
    auto number = [&](const char* key, double& out, bool required) {
        if (!j.contains(key)) {
            if (required) errs.push_back({std::string("/") + key, "required"});
            return;
        }
        if (!j.at(key).is_number()) {
            errs.push_back({std::string("/") + key, "must be a number"});
            return;
        }
        out = j.at(key).get<double>();
    };
    number("f_max", s.f_max, true);
    number("band_width_max_hz", s.band_width_max_hz, true);
    number("duration_s", s.duration_s, false);
    if (!j.contains("n_bands_max")) {
        errs.push_back({"/n_bands_max", "required"});
    } else if (!j.at("n_bands_max").is_number_integer()) {
        errs.push_back({"/n_bands_max", "must be an integer"});
    } else {
        s.n_bands_max = j.at("n_bands_max").get<int>();
    }
    if (j.contains("seed")) {
        if (j.at("seed").is_number_unsigned() || j.at("seed").is_number_integer())
            s.seed = j.at("seed").get<std::uint64_t>();
        else
            errs.push_back({"/seed", "must be a non-negative integer"});
    }
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) {
        if (j.at("snr_db").is_number())
            s.snr_db = j.at("snr_db").get<double>();
        else
            errs.push_back({"/snr_db", "must be a number or null"});
    }
    if (!j.contains("bands")) {
        errs.push_back({"/bands", "required"});
    } else if (!j.at("bands").is_array()) {
        errs.push_back({"/bands", "must be an array"});
    } else {
        const auto& arr = j.at("bands");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "/bands/" + std::to_string(i);
            const auto& b = arr[i];
            if (!b.is_object()) {
                errs.push_back({p, "band must be a JSON object"});
                continue;
            }
            const std::size_t before = errs.size();
            auto expect_number = [&](const Json& obj, const std::string& path, const char* key, bool required) {
                if (!obj.contains(key)) {
                    if (required) errs.push_back({path + "/" + key, "required"});
                } else if (!obj.at(key).is_number()) {
                    errs.push_back({path + "/" + key, "must be a number"});
                }
            };
            expect_number(b, p, "carrier_hz", true);
            expect_number(b, p, "bandwidth_hz", false);
            expect_number(b, p, "amplitude", false);
            if (b.contains("phase_rad") && !b.at("phase_rad").is_null()) expect_number(b, p, "phase_rad", false);
            if (b.contains("modulation")) {
                const auto& m = b.at("modulation");
                if (!m.is_string() || (m != "pure_sine" && m != "am" && m != "fm"))
                    errs.push_back({p + "/modulation", "must be one of pure_sine, am, fm"});
            }
            if (b.contains("mod_params")) {
                const auto& mp = b.at("mod_params");
                if (!mp.is_object()) {
                    errs.push_back({p + "/mod_params", "must be a JSON object"});
                } else {
                    for (const char* key : {"envelope_hz", "depth", "deviation_hz", "rate_hz"})
                        expect_number(mp, p + "/mod_params", key, false);
                }
            }
            if (errs.size() == before) s.bands.push_back(b.get<BandSpec>());
        }
    }
    if (errs.empty()) errs = check_scenario(s);
    if (!errs.empty()) throw InvalidScenario(std::move(errs));
    return s;
}

void to_json(Json& j, const ChipPattern& p) { j = Json{{"chips", p.chips}, {"period_s", p.period_s}}; }

void from_json(const Json& j, ChipPattern& p)
{
    p.chips = j.at("chips").get<std::vector<int>>();
    p.period_s = j.value("period_s", 1.0);
    validate_pattern(p);
}

void to_json(Json& j, const WaveformBank& b)
{
    j = Json{{"derivation", derivation_name(b.derivation)}, {"patterns", b.patterns}};
    if (b.seed) j["seed"] = *b.seed;
    if (b.base) j["base"] = *b.base;
    if (!b.taps.empty()) j["taps"] = b.taps;
}

void from_json(const Json& j, WaveformBank& b)
{
    const auto d = j.value("derivation", std::string("independent_random"));
    if (d == "tapped_register") {
        b = gen_tapped_bank(j.at("base").get<ChipPattern>(), j.at("taps").get<std::vector<std::size_t>>());
    } else if (d == "independent_random") {
        b.derivation = BankDerivation::independent_random;
        b.patterns = j.at("patterns").get<std::vector<ChipPattern>>();
        if (j.contains("seed")) b.seed = j.at("seed").get<std::uint64_t>();
        b.base.reset();
        b.taps.clear();
    } else {
        throw InvalidArgument("unknown bank derivation '" + d + "'");
    }
    validate_bank(b);
}

void to_json(Json& j, const MwcConfig& c)
{
    j = Json{{"m", c.m},   {"q", c.q},           {"f_p", c.f_p}, {"f_s", c.f_s}, {"m_chips", c.m_chips},
             {"L", c.L},   {"n_snapshots", c.n_snapshots}};
}

void from_json(const Json& j, MwcConfig& c)
{
    MwcConfig d;
    c.m = j.value("m", d.m);
    c.q = j.value("q", d.q);
    c.f_p = j.value("f_p", d.f_p);
    c.f_s = j.value("f_s", c.q * c.f_p);
    c.m_chips = j.value("m_chips", d.m_chips);
    c.L = j.value("L", d.L);
    c.n_snapshots = j.value("n_snapshots", d.n_snapshots);
}

void to_json(Json& j, const RateReport& r)
{
    j = Json{{"total_rate_hz", r.total_rate_hz},
             {"nyquist_rate_hz", r.nyquist_rate_hz},
             {"ratio", r.ratio},
             {"target_rate_hz", r.target_rate_hz},
             {"basic_configuration", r.basic_configuration},
             {"rate_guidance_met", r.rate_guidance_met},
             {"resolution_ge_bandwidth", r.resolution_ge_bandwidth},
             {"chip_rate_covers_nyquist", r.chip_rate_covers_nyquist},
             {"columns_cover_passband", r.columns_cover_passband},
             {"advisories", r.advisories}};
}

void to_json(Json& j, const SupportSet& s) { j = s.indices; }
void from_json(const Json& j, SupportSet& s) { s = SupportSet(j.get<std::vector<int>>()); }

void to_json(Json& j, const Interval& iv) { j = Json{{"start_hz", iv.lo}, {"end_hz", iv.hi}}; }

void to_json(Json& j, const HoleMap& h) { j = h.holes; }

void to_json(Json& j, const CtfDiagnostics& d)
{
    j = Json{{"eigenvalues", d.eigenvalues},         {"kept_eigenvalues", d.kept_eigenvalues},
             {"residual_curve", d.residual_curve},   {"selection_order", d.selection_order},
             {"iterations", d.iterations},           {"rank_deficient", d.rank_deficient},
             {"stop_reason", d.stop_reason},         {"residual_tol", d.residual_tol},
             {"wall_time_s", d.wall_time_s}};
}

void to_json(Json& j, const DetectOptions& o)
{
    j = Json{{"rel_tol", o.rel_tol},
             {"residual_tol", o.residual_tol},
             {"symmetrize", o.symmetrize},
             {"noise_aware", o.noise_aware},
             {"rule", to_string(o.rule)},
             {"conjugate_pairs", o.conjugate_pairs}};
}

void from_json(const Json& j, DetectOptions& o)
{
    DetectOptions d;
    o.rel_tol = j.value("rel_tol", d.rel_tol);
    o.residual_tol = j.value("residual_tol", d.residual_tol);
    o.symmetrize = j.value("symmetrize", d.symmetrize);
    o.noise_aware = j.value("noise_aware", d.noise_aware);
    o.rule = selection_rule_from_string(j.value("rule", to_string(d.rule)));
    o.conjugate_pairs = j.value("conjugate_pairs", d.conjugate_pairs);
}

void to_json(Json& j, const CarrierEstimate& c)
{
    j = Json{{"slices", c.slices}, {"frequency_hz", c.frequency_hz}, {"method", c.method}, {"occupied_hz", c.occupied_hz}};
}

void to_json(Json& j, const SliceSet& s)
{
    j = Json::object();
    j["f_p"] = s.f_p;
    j["length"] = s.length();
    Json slices = Json::object();
    for (const auto& [l, z] : s.slices) {
        Json re = Json::array(), im = Json::array();
        for (const auto& v : z) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        slices[std::to_string(l)] = Json{{"re", re}, {"im", im}};
    }
    j["slices"] = slices;
}

void to_json(Json& j, const RecoveryResult& r)
{
    j = Json{{"support", r.support},   {"holes", r.holes},           {"carriers_hz", Json::array()},
             {"carriers", r.carriers}, {"diagnostics", r.diagnostics}, {"notes", r.notes}};
    for (const auto& c : r.carriers) j["carriers_hz"].push_back(c.frequency_hz);
    if (!r.slices.slices.empty()) {
        j["slices"] = r.slices;
    }
}

void to_json(Json& j, const SampleMatrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
        Json re = Json::array(), im = Json::array();
        for (Eigen::Index c = 0; c < m.rows.cols(); ++c) {
            re.push_back(m.rows(r, c).real());
            im.push_back(m.rows(r, c).imag());
        }
        rows.push_back(Json{{"re", re}, {"im", im}});
    }
    j = Json{{"row_count", m.rows.rows()}, {"snapshots", m.rows.cols()}, {"f_p", m.f_p},
             {"q", m.q},                   {"ordering", m.ordering},     {"rows", rows},
             {"diagnostics", m.diagnostics}};
}

void write_matrix_binary(std::ostream& os, const CMatrix& m, double f_p, MatrixOrdering tag)
{
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    put<double>(os, f_p);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(tag));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put<double>(os, m(r, c).real());
            put<double>(os, m(r, c).imag());
        }
    }
}

BinaryMatrix read_matrix_binary(std::istream& is)
{
    BinaryMatrix out;
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    out.f_p = get<double>(is);
    const auto tag = get<std::uint32_t>(is);
    if (tag > 1) throw InvalidArgument("unknown matrix ordering tag " + std::to_string(tag));
    out.ordering = static_cast<MatrixOrdering>(tag);
    if (rows > (1ULL << 24) || cols > (1ULL << 32)) throw InvalidArgument("implausible matrix dimensions");
    out.data.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < out.data.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.data.cols(); ++c) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            out.data(r, c) = {re, im};
        }
    }
    return out;
}

void write_samples_binary(std::ostream& os, const SampleMatrix& m)
{
    write_matrix_binary(os, m.rows, m.f_p, MatrixOrdering::channel_major_shift_minor);
}

SampleMatrix read_samples_binary(std::istream& is)
{
    auto b = read_matrix_binary(is);
    if (b.ordering != MatrixOrdering::channel_major_shift_minor) throw InvalidArgument("not a sample matrix");
    SampleMatrix m;
    m.rows = std::move(b.data);
    m.f_p = b.f_p;
    return m;
}

void write_sensing_binary(std::ostream& os, const SensingMatrix& C)
{
    write_matrix_binary(os, C.entries, C.f_p, MatrixOrdering::slice_columns);
}

Json sensing_metadata(const SensingMatrix& C, const WaveformBank& bank)
{
    return Json{{"m", C.m}, {"q", C.q}, {"L", C.L}, {"f_p", C.f_p}, {"rows", C.rows()}, {"cols", C.cols()},
                {"bank", bank}};
}

void write_dense_binary(std::ostream& os, const DenseSignal& x)
{
    put<std::uint64_t>(os, x.samples.size());
    put<double>(os, x.sample_rate_hz);
    put<double>(os, x.t0);
    put<double>(os, x.f_max_hz);
    for (double v : x.samples) put<double>(os, v);
}

DenseSignal read_dense_binary(std::istream& is)
{
    DenseSignal x;
    const auto n = get<std::uint64_t>(is);
    x.sample_rate_hz = get<double>(is);
    x.t0 = get<double>(is);
    x.f_max_hz = get<double>(is);
    if (n > (1ULL << 34)) throw InvalidArgument("implausible sample count");
    x.samples.resize(static_cast<std::size_t>(n));
    for (auto& v : x.samples) v = get<double>(is);
    return x;
}

void write_wav(std::ostream& os, const std::vector<double>& samples, std::uint32_t sample_rate)
{
    double peak = 0.0;
    for (double v : samples) peak = std::max(peak, std::abs(v));
    const double scale = peak > 0.0 ? 32767.0 / peak : 0.0;
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    os.write("RIFF", 4);
    put<std::uint32_t>(os, 36 + data_bytes);
    os.write("WAVEfmt ", 8);
    put<std::uint32_t>(os, 16);
    put<std::uint16_t>(os, 1);  // PCM
    put<std::uint16_t>(os, 1);  // mono
    put<std::uint32_t>(os, sample_rate);
    put<std::uint32_t>(os, sample_rate * 2);
    put<std::uint16_t>(os, 2);
    put<std::uint16_t>(os, 16);
    os.write("data", 4);
    put<std::uint32_t>(os, data_bytes);
    for (double v : samples) put<std::int16_t>(os, static_cast<std::int16_t>(std::lround(v * scale)));
}

std::string holes_csv(const HoleMap& holes)
{
    std::ostringstream os;
    os.precision(17);
    os << "start_hz,end_hz\n";
    for (const auto& h : holes.holes) os << h.lo << ',' << h.hi << '\n';
    return os.str();
}

std::string digest_bytes(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest(const SampleMatrix& m)
{
    std::ostringstream os;
    write_samples_binary(os, m);
    return digest_bytes(os.str());
}

}  // namespace mwc
