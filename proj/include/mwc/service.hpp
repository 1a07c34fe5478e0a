// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mwc/pipeline.hpp"

namespace httplib {
class Server;
}

namespace mwc {

/// Transport-independent response of the sensing service.
struct ServiceResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;

    Json json() const { return Json::parse(body); }
};

struct ServiceOptions {
    std::optional<std::filesystem::path> persist_dir;  ///< one JSON file per run plus binary sidecars
};

/// Four-stage run flow behind the /v1 HTTP API:
///   POST /v1/runs                         scenario -> run_id
///   POST /v1/runs/{id}/sample             MWC config -> rate report, baseband periodogram
///   POST /v1/runs/{id}/recover            options -> support, holes, diagnostics
///   POST /v1/runs/{id}/reconstruct        -> carriers, per-band correlation, artifact URLs
///   GET  /v1/runs/{id}                    -> run record
///   GET  /v1/runs/{id}/artifacts/{name}   -> artifact bytes
class SensingService {
public:
    explicit SensingService(ServiceOptions options = {});
    ~SensingService();
    SensingService(const SensingService&) = delete;
    SensingService& operator=(const SensingService&) = delete;

    /// Dispatches one request; never throws.
    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    ServiceResponse create_run(const std::string& body) const;
    ServiceResponse sample_run(const std::string& id, const std::string& body) const;
    ServiceResponse recover_run(const std::string& id, const std::string& body) const;
    ServiceResponse reconstruct_run(const std::string& id) const;
    ServiceResponse get_run(const std::string& id) const;
    ServiceResponse get_artifact(const std::string& id, const std::string& name) const;

    /// Registers every route on an httplib server.
    void mount(httplib::Server& server) const;

    std::size_t run_count() const;

private:
    struct Run;
    std::shared_ptr<Run> find(const std::string& id) const;
    void persist(const Run& run) const;
    void load_persisted();

    ServiceOptions options_;
    mutable std::mutex store_mutex_;
    mutable std::map<std::string, std::shared_ptr<Run>> runs_;
};

/// JSON error envelope {code, message, details}.
ServiceResponse error_response(int status, const std::string& code, const std::string& message,
                               const Json& details = Json::object());

}  // namespace mwc
