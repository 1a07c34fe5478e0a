// SPDX-License-Identifier: Apache-2.0

#include "mwc/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "mwc/error.hpp"
#include "mwc/fft.hpp"
#include "mwc/harness.hpp"

namespace mwc {

struct SensingService::Run {
    enum Stage { created = 0, sampled = 1, recovered = 2, reconstructed = 3 };

    std::mutex mu;
    std::string id;
    std::string created_at;
    Stage stage = created;
    SignalScenario scenario;

    Json sample_request;
    MwcConfig config;
    BankSpec bank;
    double grid_rate_hz = 0.0;
    std::optional<Acquisition> acq;
    std::string digest;
    Json sample_summary;

    Json recover_request;
    RecoveryResult recovery;
    Json recovery_json;

    Json reconstruction_summary;
    std::map<std::string, std::pair<std::string, std::string>> artifacts;  ///< name -> (content type, bytes)
    std::vector<std::string> notes;
};

namespace {

const char* stage_name(int s)
{
    switch (s) {
    case 1: return "sampled";
    case 2: return "recovered";
    case 3: return "reconstructed";
    default: return "created";
    }
}

ServiceResponse ok(const Json& j, int status = 200) { return ServiceResponse{status, "application/json", j.dump()}; }

std::string now_iso8601()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_token()
{
    static std::mutex mu;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mu);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

Json parse_body(const std::string& body)
{
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    return Json::parse(body);
}

Json field_errors(const std::vector<FieldError>& errs)
{
    Json out = Json::array();
    for (const auto& e : errs) out.push_back(Json{{"path", e.path}, {"message", e.message}});
    return out;
}

std::string bytes_of(const std::function<void(std::ostream&)>& write)
{
    std::ostringstream os(std::ios::binary);
    write(os);
    return os.str();
}

Json periodogram(const SampleMatrix& s)
{
    const auto K = static_cast<long long>(s.snapshots());
    std::vector<double> p(static_cast<std::size_t>(K), 0.0);
    for (Eigen::Index r = 0; r < s.rows.rows(); ++r) {
        std::vector<Complex> row(static_cast<std::size_t>(K));
        for (long long n = 0; n < K; ++n) row[static_cast<std::size_t>(n)] = s.rows(r, n);
        const auto F = fft::forward(std::span<const Complex>(row));
        for (long long k = 0; k < K; ++k)
            p[static_cast<std::size_t>(k)] += std::norm(F[static_cast<std::size_t>(k)]) / static_cast<double>(K * K);
    }
    Json freqs = Json::array(), db = Json::array();
    for (long long d = -(K / 2); d < K - K / 2; ++d) {
        freqs.push_back(static_cast<double>(d) * s.f_p / static_cast<double>(K));
        const double v = p[fft::wrap(d, K)] / std::max<double>(1.0, static_cast<double>(s.rows.rows()));
        db.push_back(v > 0.0 ? 10.0 * std::log10(v) : -300.0);
    }
    return Json{{"frequency_hz", freqs}, {"power_db", db}};
}

/// Normalized inner product of the spectra of a and b restricted to one band.
std::optional<double> band_correlation(const std::vector<Complex>& A, const std::vector<Complex>& B, double rate,
                                       const BandSpec& band, double guard_hz)
{
    const auto N = static_cast<long long>(A.size());
    const double df = rate / static_cast<double>(N);
    const double half = band.occupied_width() / 2.0 + guard_hz;
    Complex cross = 0.0;
    double ea = 0.0, eb = 0.0;
    for (double c : {band.carrier_hz, -band.carrier_hz}) {
        const auto lo = static_cast<long long>(std::ceil((c - half) / df));
        const auto hi = static_cast<long long>(std::floor((c + half) / df));
        for (long long k = lo; k <= hi; ++k) {
            const auto i = fft::wrap(k, N);
            cross += A[i] * std::conj(B[i]);
            ea += std::norm(A[i]);
            eb += std::norm(B[i]);
        }
    }
    if (!(ea > 0.0) || !(eb > 0.0)) return std::nullopt;
    return cross.real() / std::sqrt(ea * eb);
}

}  // namespace

ServiceResponse error_response(int status, const std::string& code, const std::string& message, const Json& details)
{
    return ServiceResponse{status, "application/json",
                           Json{{"code", code}, {"message", message}, {"details", details}}.dump()};
}

SensingService::SensingService(ServiceOptions options) : options_(std::move(options))
{
    if (options_.persist_dir) {
        std::filesystem::create_directories(*options_.persist_dir);
        load_persisted();
    }
}

SensingService::~SensingService() = default;

std::size_t SensingService::run_count() const
{
    std::lock_guard lock(store_mutex_);
    return runs_.size();
}

std::shared_ptr<SensingService::Run> SensingService::find(const std::string& id) const
{
    std::lock_guard lock(store_mutex_);
    const auto it = runs_.find(id);
    return it == runs_.end() ? nullptr : it->second;
}

ServiceResponse SensingService::create_run(const std::string& body) const
{
    Json j;
    try {
        j = parse_body(body);
    } catch (const Json::parse_error& e) {
        return error_response(400, "invalid_json", e.what());
    }
    if (j.is_object() && j.contains("scenario")) j = j.at("scenario");
    auto run = std::make_shared<Run>();
    try {
        run->scenario = parse_scenario(j);
    } catch (const InvalidScenario& e) {
        return error_response(422, "invalid_scenario", "scenario failed validation", Json{{"errors", field_errors(e.errors())}});
    } catch (const std::exception& e) {
        return error_response(422, "invalid_scenario", e.what());
    }
    run->id = new_token();
    run->created_at = now_iso8601();
    run->artifacts["scenario.json"] = {"application/json", Json(run->scenario).dump(2)};
    {
        std::lock_guard lock(store_mutex_);
        while (runs_.count(run->id)) run->id = new_token();
        runs_[run->id] = run;
    }
    persist(*run);
    return ok(Json{{"run_id", run->id}, {"created_at", run->created_at}, {"stage", stage_name(run->stage)}}, 201);
}

ServiceResponse SensingService::sample_run(const std::string& id, const std::string& body) const
{
    const auto run = find(id);
    if (!run) return error_response(404, "not_found", "unknown run '" + id + "'");
    Json j;
    try {
        j = parse_body(body);
    } catch (const Json::parse_error& e) {
        return error_response(400, "invalid_json", e.what());
    }

    HarnessConfig h = prototype_config();
    try {
        if (!j.is_object()) throw InvalidConfig("sampling request must be a JSON object");
        Json hj = Json::object();
        if (j.contains("config") || j.contains("bank") || j.contains("grid_rate_hz")) {
            if (j.contains("config")) hj["mwc"] = j.at("config");
            if (j.contains("bank")) hj["bank"] = j.at("bank");
            if (j.contains("grid_rate_hz")) hj["grid_rate_hz"] = j.at("grid_rate_hz");
        } else if (!j.empty()) {
            hj["mwc"] = j;
        }
        h = hj.get<HarnessConfig>();
        check_structure(h.mwc);
    } catch (const InvalidConfig& e) {
        return error_response(422, "invalid_config", e.what());
    } catch (const std::exception& e) {
        return error_response(422, "invalid_config", e.what());
    }
    const Json canonical{{"config", h.mwc}, {"bank", h.bank}, {"grid_rate_hz", h.grid_rate_hz}};

    std::lock_guard lock(run->mu);
    if (run->stage >= Run::sampled) {
        if (run->sample_request == canonical) return ok(run->sample_summary);
        return error_response(409, "conflict", "run already sampled with a different configuration; create a new run",
                              Json{{"stage", stage_name(run->stage)}});
    }
    try {
        const WaveformBank bank = make_bank(h.bank, h.mwc);
        run->acq = acquire(run->scenario, h.mwc, bank, h.grid_rate_hz);
        run->config = h.mwc;
        run->bank = h.bank;
        run->grid_rate_hz = run->acq->grid_rate_hz;
        run->sample_request = canonical;
        run->digest = digest(run->acq->samples);
        const RateReport rr = validate_config(h.mwc, run->scenario);
        Json offsets = Json::array();
        for (const auto& b : run->scenario.bands)
            offsets.push_back(Json{{"carrier_hz", b.carrier_hz}, {"baseband_offset_hz", baseband_offset(b.carrier_hz, h.mwc.f_p)}});
        run->sample_summary = Json{{"run_id", run->id},
                                   {"stage", "sampled"},
                                   {"rate_report", rr},
                                   {"badges", {{"basic_configuration", rr.basic_configuration}}},
                                   {"sample_digest", run->digest},
                                   {"rows", run->acq->samples.row_count()},
                                   {"snapshots", run->acq->samples.snapshots()},
                                   {"grid_rate_hz", run->grid_rate_hz},
                                   {"ordering", run->acq->samples.ordering},
                                   {"periodogram", periodogram(run->acq->samples)},
                                   {"aliased_offsets", offsets},
                                   {"diagnostics", run->acq->samples.diagnostics}};
        run->artifacts["samples.bin"] = {"application/octet-stream",
                                         bytes_of([&](std::ostream& os) { write_samples_binary(os, run->acq->samples); })};
        run->artifacts["sensing.bin"] = {"application/octet-stream",
                                         bytes_of([&](std::ostream& os) { write_sensing_binary(os, run->acq->C); })};
        run->artifacts["sensing.json"] = {"application/json", sensing_metadata(run->acq->C, bank).dump(2)};
        run->stage = Run::sampled;
    } catch (const InvalidConfig& e) {
        run->acq.reset();
        return error_response(422, "invalid_config", e.what());
    } catch (const InvalidArgument& e) {
        run->acq.reset();
        return error_response(422, "invalid_config", e.what());
    }
    persist(*run);
    return ok(run->sample_summary);
}

ServiceResponse SensingService::recover_run(const std::string& id, const std::string& body) const
{
    const auto run = find(id);
    if (!run) return error_response(404, "not_found", "unknown run '" + id + "'");
    Json j;
    try {
        j = parse_body(body);
    } catch (const Json::parse_error& e) {
        return error_response(400, "invalid_json", e.what());
    }
    std::lock_guard lock(run->mu);
    if (run->stage < Run::sampled)
        return error_response(409, "conflict", "recovery requires a sampled run", Json{{"stage", stage_name(run->stage)}});

    DetectOptions opt;
    int sparsity = default_sparsity(run->acq->scenario, run->config);
    try {
        if (!j.is_object()) throw InvalidArgument("recovery options must be a JSON object");
        if (j.contains("detect")) {
            Json merged = opt;
            merged.merge_patch(j.at("detect"));
            opt = merged.get<DetectOptions>();
        }
        if (j.contains("sparsity") && !j.at("sparsity").is_null()) {
            if (!j.at("sparsity").is_number_integer()) throw InvalidArgument("sparsity must be an integer");
            sparsity = j.at("sparsity").get<int>();
        }
        if (sparsity < 0 || sparsity > run->config.columns())
            throw InvalidArgument("sparsity must lie in [0, 2L + 1 = " + std::to_string(run->config.columns()) + "]");
    } catch (const std::exception& e) {
        return error_response(422, "invalid_options", e.what());
    }
    const Json canonical{{"sparsity", sparsity}, {"detect", opt}};
    if (run->stage >= Run::recovered) {
        if (run->recover_request == canonical) return ok(run->recovery_json);
        return error_response(409, "conflict", "run already recovered with different options; create a new run",
                              Json{{"stage", stage_name(run->stage)}});
    }

    const Detection det = detect_support(run->acq->samples, run->acq->C, sparsity, opt);
    RecoveryResult& r = run->recovery;
    r = RecoveryResult{};
    r.support = det.support;
    r.diagnostics = det.diagnostics;
    r.holes = spectrum_holes(r.support, run->config.f_p, run->config.L, true);
    r.slices.f_p = run->config.f_p;
    run->recover_request = canonical;
    Json occupied = Json::array();
    for (const auto& iv : occupied_intervals(r.support, run->config.f_p, run->config.L, true)) occupied.push_back(iv);
    run->recovery_json = Json{{"run_id", run->id},
                              {"stage", "recovered"},
                              {"sparsity", sparsity},
                              {"detect", opt},
                              {"support", r.support},
                              {"holes", r.holes},
                              {"occupied", occupied},
                              {"diagnostics", r.diagnostics}};
    Json stored = run->recovery_json;
    stored.erase("run_id");
    stored.erase("stage");
    run->artifacts["recovery.json"] = {"application/json", stored.dump(2)};
    run->artifacts["holes.csv"] = {"text/csv", holes_csv(r.holes)};
    run->stage = Run::recovered;
    persist(*run);
    return ok(run->recovery_json);
}

ServiceResponse SensingService::reconstruct_run(const std::string& id) const
{
    const auto run = find(id);
    if (!run) return error_response(404, "not_found", "unknown run '" + id + "'");
    std::lock_guard lock(run->mu);
    if (run->stage < Run::recovered)
        return error_response(409, "conflict", "reconstruction requires a recovered run",
                              Json{{"stage", stage_name(run->stage)}});
    if (run->stage >= Run::reconstructed) return ok(run->reconstruction_summary);

    const Acquisition& acq = *run->acq;
    RecoveryResult& r = run->recovery;
    Json carriers = Json::array(), correlations = Json::array(), errors = Json::array();
    DenseSignal rec;
    bool zero = r.support.empty();
    if (zero) {
        rec.sample_rate_hz = acq.grid_rate_hz;
        rec.f_max_hz = acq.x.f_max_hz;
        rec.samples.assign(acq.x.samples.size(), 0.0);
        for (std::size_t b = 0; b < acq.scenario.bands.size(); ++b) {
            correlations.push_back(nullptr);
            errors.push_back(nullptr);
        }
    } else {
        try {
            r.slices = recover_slices(acq.samples, acq.C, r.support);
        } catch (const ReconstructionIllPosed& e) {
            return error_response(422, "reconstruction_ill_posed", e.what(), Json{{"columns", e.columns()}});
        }
        rec = reconstruct_signal(r.slices, acq.grid_rate_hz, acq.scenario.duration_s);
        const CarrierReport cr = estimate_carriers(r.slices, r.support);
        r.carriers = cr.carriers;
        r.notes = cr.diagnostics;
        for (const auto& c : r.carriers) carriers.push_back(c);

        const DenseSignal clean = synthesize_clean(acq.scenario, acq.grid_rate_hz);
        const auto A = fft::forward(std::span<const double>(clean.samples));
        const auto B = fft::forward(std::span<const double>(rec.samples));
        const double guard = 2.0 * run->config.f_p / static_cast<double>(acq.samples.snapshots());
        for (const auto& band : acq.scenario.bands) {
            const auto c = band_correlation(A, B, acq.grid_rate_hz, band, guard);
            correlations.push_back(c ? Json(*c) : Json(nullptr));
            std::optional<double> best;
            for (const auto& est : r.carriers) {
                const double e = std::abs(est.frequency_hz - band.carrier_hz);
                if (!best || e < *best) best = e;
            }
            errors.push_back(best ? Json(*best) : Json(nullptr));
        }
    }
    Json bands = Json::array();
    for (std::size_t b = 0; b < acq.scenario.bands.size(); ++b)
        bands.push_back(Json{{"carrier_hz", acq.scenario.bands[b].carrier_hz},
                             {"modulation", to_string(acq.scenario.bands[b].modulation)},
                             {"correlation", correlations[b]},
                             {"carrier_error_hz", errors[b]}});
    const std::string url = "/v1/runs/" + run->id + "/artifacts/reconstruction.bin";
    run->artifacts["reconstruction.bin"] = {"application/octet-stream",
                                            bytes_of([&](std::ostream& os) { write_dense_binary(os, rec); })};
    run->reconstruction_summary = Json{{"run_id", run->id},
                                       {"stage", "reconstructed"},
                                       {"zero_signal", zero},
                                       {"support", r.support},
                                       {"carriers", carriers},
                                       {"bands", bands},
                                       {"notes", r.notes},
                                       {"waveform_url", url},
                                       {"waveform_samples", rec.samples.size()},
                                       {"waveform_rate_hz", rec.sample_rate_hz}};
    Json stored = run->reconstruction_summary;
    stored.erase("run_id");
    stored.erase("stage");
    run->artifacts["reconstruction.json"] = {"application/json", stored.dump(2)};
    run->stage = Run::reconstructed;
    persist(*run);
    return ok(run->reconstruction_summary);
}

ServiceResponse SensingService::get_run(const std::string& id) const
{
    const auto run = find(id);
    if (!run) return error_response(404, "not_found", "unknown run '" + id + "'");
    std::lock_guard lock(run->mu);
    Json names = Json::array();
    for (const auto& [name, _] : run->artifacts) names.push_back(name);
    Json j{{"run_id", run->id},
           {"created_at", run->created_at},
           {"stage", stage_name(run->stage)},
           {"scenario", run->scenario},
           {"artifacts", names},
           {"notes", run->notes}};
    if (run->stage >= Run::sampled) {
        j["sample_request"] = run->sample_request;
        j["sample_digest"] = run->digest;
        j["rate_report"] = run->sample_summary.at("rate_report");
    }
    if (run->stage >= Run::recovered) {
        j["recover_request"] = run->recover_request;
        j["recovery"] = Json{{"support", run->recovery.support}, {"holes", run->recovery.holes}};
    }
    if (run->stage >= Run::reconstructed) j["reconstruction"] = run->reconstruction_summary;
    return ok(j);
}

ServiceResponse SensingService::get_artifact(const std::string& id, const std::string& name) const
{
    const auto run = find(id);
    if (!run) return error_response(404, "not_found", "unknown run '" + id + "'");
    std::lock_guard lock(run->mu);
    const auto it = run->artifacts.find(name);
    if (it == run->artifacts.end()) return error_response(404, "not_found", "run has no artifact '" + name + "'");
    return ServiceResponse{200, it->second.first, it->second.second};
}

ServiceResponse SensingService::handle(const std::string& method, const std::string& path,
                                       const std::string& body) const
{
    try {
        std::vector<std::string> parts;
        std::stringstream ss(path);
        for (std::string p; std::getline(ss, p, '/');)
            if (!p.empty()) parts.push_back(p);
        auto wrong_method = [&] { return error_response(405, "method_not_allowed", method + " not allowed on " + path); };
        if (parts.size() < 2 || parts[0] != "v1") return error_response(404, "not_found", "no route for " + path);
        if (parts[1] == "health" && parts.size() == 2)
            return method == "GET" ? ok(Json{{"status", "ok"}}) : wrong_method();
        if (parts[1] != "runs") return error_response(404, "not_found", "no route for " + path);
        if (parts.size() == 2) return method == "POST" ? create_run(body) : wrong_method();
        const std::string& id = parts[2];
        if (parts.size() == 3) return method == "GET" ? get_run(id) : wrong_method();
        if (parts.size() == 4) {
            if (method != "POST") return wrong_method();
            if (parts[3] == "sample") return sample_run(id, body);
            if (parts[3] == "recover") return recover_run(id, body);
            if (parts[3] == "reconstruct") return reconstruct_run(id);
        }
        if (parts.size() == 5 && parts[3] == "artifacts") return method == "GET" ? get_artifact(id, parts[4]) : wrong_method();
        return error_response(404, "not_found", "no route for " + path);
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

void SensingService::mount(httplib::Server& server) const
{
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const ServiceResponse r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Put(".*", forward);
    server.Delete(".*", forward);
}

void SensingService::persist(const Run& run) const
{
    if (!options_.persist_dir) return;
    const auto& dir = *options_.persist_dir;
    Json j{{"run_id", run.id}, {"created_at", run.created_at}, {"stage", stage_name(run.stage)},
           {"scenario", run.scenario}};
    if (run.stage >= Run::sampled) {
        j["sample_request"] = run.sample_request;
        j["sample_digest"] = run.digest;
        std::ofstream bin(dir / (run.id + ".samples.bin"), std::ios::binary);
        write_samples_binary(bin, run.acq->samples);
    }
    if (run.stage >= Run::recovered) j["recover_request"] = run.recover_request;
    const auto tmp = dir / (run.id + ".json.tmp");
    {
        std::ofstream out(tmp);
        out << j.dump(2);
    }
    std::filesystem::rename(tmp, dir / (run.id + ".json"));
}

void SensingService::load_persisted()
{
    for (const auto& entry : std::filesystem::directory_iterator(*options_.persist_dir)) {
        if (entry.path().extension() != ".json") continue;
        Json j;
        try {
            std::ifstream in(entry.path());
            j = Json::parse(in);
        } catch (const std::exception&) {
            continue;
        }
        if (!j.contains("run_id") || !j.contains("scenario")) continue;
        auto run = std::make_shared<Run>();
        run->id = j.at("run_id").get<std::string>();
        run->created_at = j.value("created_at", std::string());
        try {
            run->scenario = parse_scenario(j.at("scenario"));
        } catch (const std::exception&) {
            continue;
        }
        run->artifacts["scenario.json"] = {"application/json", Json(run->scenario).dump(2)};
        {
            std::lock_guard lock(store_mutex_);
            runs_[run->id] = run;
        }
        // Stage outputs are deterministic functions of the stored requests, so replay them.
        const std::string stage = j.value("stage", std::string("created"));
        if (stage == "created") continue;
        if (j.contains("sample_request")) sample_run(run->id, j.at("sample_request").dump());
        if (j.contains("sample_digest") && run->digest != j.at("sample_digest").get<std::string>())
            run->notes.push_back("replayed sample digest differs from the stored digest");
        if (stage == "recovered" || stage == "reconstructed")
            if (j.contains("recover_request")) recover_run(run->id, j.at("recover_request").dump());
        if (stage == "reconstructed") reconstruct_run(run->id);
    }
}

}  // namespace mwc
