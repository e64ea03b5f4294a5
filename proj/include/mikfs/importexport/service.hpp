#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mikfs/core/status.hpp"
#include "mikfs/importexport/store.hpp"
#include "mikfs/rpc/server.hpp"
#include "mikfs/rpc/tls.hpp"

namespace mikfs::importexport {

inline constexpr std::size_t kSiteQueueLimit = 1024;

// Pending site deltas for one SitesSubscribe call.
class SiteSubscription {
public:
    std::optional<SiteDelta> next(std::chrono::milliseconds wait);
    // True once deltas were dropped and everything before the drop was read.
    bool overflowed();

private:
    friend class ImportExportService;
    void offer(const SiteDelta& delta);

    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<SiteDelta> queue_;
    bool overflowed_ = false;
};

// The 16 ImportExport methods over one Store behind a single mutex.
// `persist` runs after every successful mutation, still under the lock.
class ImportExportService {
public:
    using Clock = std::function<std::uint64_t()>;
    using Persist = std::function<core::Status(const Store&)>;

    explicit ImportExportService(Store store, Clock clock = {}, Persist persist = {});

    ImportExportService(const ImportExportService&) = delete;
    ImportExportService& operator=(const ImportExportService&) = delete;

    // Handlers capture this; the service must outlive the rpc server.
    rpc::Service rpc_service();

    std::string serialize();
    std::size_t subscriber_count();

private:
    template <class Request, class Response, class Body>
    void mutate(rpc::ServerCall& call, Body&& body);
    template <class Request, class Response, class Body>
    void query(rpc::ServerCall& call, Body&& body);

    void sites_subscribe(rpc::ServerCall& call);
    std::uint64_t stamp();
    void publish(const std::vector<SiteDelta>& deltas);

    Store store_;
    Clock clock_;
    Persist persist_;
    std::uint64_t last_stamp_ = 0;
    std::mutex mutex_;
    std::list<std::shared_ptr<SiteSubscription>> subscribers_;
};

struct ImportExportConfig {
    // Loopback by default: the service does not authenticate callers.
    std::string bind_address = "127.0.0.1";
    std::uint16_t port = kDefaultPort;
    rpc::TlsServerConfig tls;
    std::filesystem::path state_path;  // empty: memory only
};

class ImportExportServer {
public:
    // Loads state_path when it exists; a malformed file is an error.
    static core::Result<std::unique_ptr<ImportExportServer>> create(ImportExportConfig config,
                                                                    ImportExportService::Clock clock = {});

    ~ImportExportServer();

    core::Status start();
    void stop();

    std::uint16_t port() const { return rpc_->port(); }
    ImportExportService& service() { return *service_; }

private:
    ImportExportServer() = default;

    std::unique_ptr<ImportExportService> service_;
    std::unique_ptr<rpc::Server> rpc_;
    bool running_ = false;
};

}  // namespace mikfs::importexport
