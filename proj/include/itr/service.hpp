#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "itr/engine.hpp"

namespace itr {

/// Sidecar HTTP service over an Engine. Endpoints:
///   POST /v1/retrieve   query -> scored candidates
///   POST /v1/select     candidates + config -> SelectionResult
///   POST /v1/assemble   selection -> prompt text + structure
///   POST /v1/step       StepQuery -> StepResult (one telemetry line each)
///   GET  /v1/health     version, cache stats, index hashes
/// Errors carry a machine-readable {code, message} JSON body.
class Service {
public:
    explicit Service(Engine& engine);
    ~Service();

    /// Binds and serves; blocks until stop(). port 0 binds any free port.
    int listen(const std::string& host, int port);
    int bound_port() const { return port_; }
    void stop();
    bool wait_until_ready(int timeout_ms = 2000) const;

private:
    struct Impl;
    Engine& engine_;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

/// Renders a {title, columns, rows} table document as aligned text or JSON.
/// Unknown formats throw ConfigError.
std::string report_render(const nlohmann::json& table, std::string_view format);

}  // namespace itr
