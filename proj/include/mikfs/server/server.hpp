#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "mikfs/core/status.hpp"
#include "mikfs/rpc/server.hpp"
#include "mikfs/rpc/tls.hpp"
#include "mikfs/server/service.hpp"

namespace mikfs::server {

inline constexpr std::uint16_t kDefaultPort = 9959;

struct ServerConfig {
    std::string bind_address = "0.0.0.0";
    std::uint16_t port = kDefaultPort;  // 0 picks a free port
    rpc::TlsServerConfig tls;
    ServiceConfig service;
    std::filesystem::path snapshot_path;  // empty: no persistence
    std::uint32_t snapshot_interval_s = 60;
};

// A running mikfs endpoint: TLS listener, service, periodic snapshots.
class MikfsServer {
public:
    // Loads the snapshot when the file exists; a corrupt one is an error.
    // Without one the tree is a root directory owned by the host key.
    static core::Result<std::unique_ptr<MikfsServer>> create(ServerConfig config);

    ~MikfsServer();

    core::Status start();
    // Stops accepting, ends open calls and writes a final snapshot.
    core::Status stop();

    std::uint16_t port() const { return rpc_->port(); }
    FileSystemService& service() { return *service_; }
    core::Status save_snapshot();

private:
    MikfsServer() = default;
    void snapshot_loop();

    ServerConfig config_;
    std::unique_ptr<FileSystemService> service_;
    std::unique_ptr<rpc::Server> rpc_;
    std::thread snapshotter_;
    std::mutex mutex_;
    std::condition_variable wake_;
    bool stopping_ = false;
    bool running_ = false;
};

}  // namespace mikfs::server
