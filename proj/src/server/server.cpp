#include "mikfs/server/server.hpp"

#include "mikfs/server/snapshot.hpp"

namespace mikfs::server {

core::Result<std::unique_ptr<MikfsServer>> MikfsServer::create(ServerConfig config)
{
    if (config.service.host_key.is_wildcard()) {
        return core::make_error(core::StatusCode::invalid_argument, "the host key must not be empty");
    }
    auto tls = rpc::TlsContext::server(config.tls);
    if (!tls.ok()) {
        return tls.status();
    }

    std::optional<core::Tree> tree;
    if (!config.snapshot_path.empty() && std::filesystem::exists(config.snapshot_path)) {
        auto loaded = load_snapshot_file(config.snapshot_path);
        if (!loaded.ok()) {
            return core::make_error(loaded.code(), config.snapshot_path.string() + ": " + loaded.status().message());
        }
        tree.emplace(std::move(*loaded));
    } else {
        tree.emplace(core::Ownership{config.service.host_key, {}},
                     core::PermissionsMask(core::kDefaultRootPermissions), core::now_ns());
    }

    std::unique_ptr<MikfsServer> server(new MikfsServer());
    server->service_ = std::make_unique<FileSystemService>(config.service, std::move(*tree));
    server->rpc_ = std::make_unique<rpc::Server>(*tls, rpc::ServerOptions{config.bind_address, config.port});
    server->rpc_->add_service(server->service_->rpc_service());
    server->config_ = std::move(config);
    return server;
}

MikfsServer::~MikfsServer()
{
    (void)stop();
}

core::Status MikfsServer::start()
{
    if (auto status = rpc_->start(); !status.ok()) {
        return status;
    }
    running_ = true;
    if (!config_.snapshot_path.empty() && config_.snapshot_interval_s > 0) {
        snapshotter_ = std::thread([this] { snapshot_loop(); });
    }
    return {};
}

core::Status MikfsServer::stop()
{
    if (!running_) {
        return {};
    }
    running_ = false;
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    wake_.notify_all();
    if (snapshotter_.joinable()) {
        snapshotter_.join();
    }
    rpc_->stop();
    return save_snapshot();
}

core::Status MikfsServer::save_snapshot()
{
    if (config_.snapshot_path.empty()) {
        return {};
    }
    return write_snapshot_file(config_.snapshot_path, service_->snapshot_bytes());
}

void MikfsServer::snapshot_loop()
{
    std::unique_lock lock(mutex_);
    while (!wake_.wait_for(lock, std::chrono::seconds(config_.snapshot_interval_s), [this] { return stopping_; })) {
        lock.unlock();
        (void)save_snapshot();
        lock.lock();
    }
}

}  // namespace mikfs::server
