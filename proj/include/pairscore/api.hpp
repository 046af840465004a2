#pragma once

#include "pairscore/core.hpp"
#include "pairscore/datastore.hpp"
#include "pairscore/trust.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace pairscore::api {

struct Config {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "pairscore-data";
    std::optional<std::filesystem::path> trusted_domains_file;
    std::optional<std::string> admin_token;
    Hyperparams hyperparams;
    TrustParams trust;
    int write_cap_per_minute = 120;  // per token; 0 disables the cap
};

/// Reads a JSON config file. Relative paths resolve against the file's
/// directory. Unknown keys are rejected.
Config load_config(const std::filesystem::path& path);

/// Applies PAIRSCORE_HOST, PAIRSCORE_PORT, PAIRSCORE_DATA_DIR,
/// PAIRSCORE_TRUSTED_DOMAINS, PAIRSCORE_ADMIN_TOKEN, PAIRSCORE_LAMBDA,
/// PAIRSCORE_NU and PAIRSCORE_C. `getenv` is injectable for tests.
void apply_env_overrides(Config& config,
                         const std::function<const char*(const char*)>& getenv = std::getenv);

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::optional<std::string> token;  // bearer token, if any
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

using Clock = std::function<Timestamp()>;
Timestamp system_now();

/// Transport-independent request handling. Thread-safe; handlers run
/// concurrently and funnel writes through the datastore.
class Service {
public:
    Service(Datastore& store, Config config, Clock clock = system_now);

    Response handle(const Request& request);

    /// Fits every criterion over certified contributors and publishes the
    /// result. Concurrent refits are serialized.
    std::shared_ptr<const Snapshot> refit();

    [[nodiscard]] const Config& config() const noexcept { return config_; }
    [[nodiscard]] TrustedDomainList trusted_domains() const;

private:
    struct Session;

    std::optional<Session> authenticate(const Request& r) const;
    bool within_write_cap(const std::string& token);
    std::shared_ptr<const Snapshot> current_snapshot() const;

    Datastore& store_;
    Config config_;
    Clock clock_;
    mutable std::mutex domains_mutex_;
    TrustedDomainList domains_;
    std::mutex refit_mutex_;
    std::mutex cap_mutex_;
    std::map<std::string, std::pair<Timestamp, int>> write_counts_;  // token -> (minute, count)
};

/// Binds and serves until stop() is called from another thread or a signal
/// handler. Construction does not bind.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// False when the address cannot be bound (e.g. port in use).
    bool bind(const std::string& host, int port);
    /// Port actually bound (useful with port 0).
    [[nodiscard]] int port() const noexcept { return port_; }
    /// Blocks until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace pairscore::api
