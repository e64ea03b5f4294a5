#include "test_server.hpp"

#include <stdexcept>

namespace mikfs::testing {

std::unique_ptr<server::MikfsServer> start_server(const TestPki& pki, const ServerOptions& options)
{
    server::ServerConfig config;
    config.bind_address = "127.0.0.1";
    config.port = 0;
    config.tls = {pki.server_cert, pki.server_key, {}};
    config.service.mode = options.mode;
    config.service.host_key = *core::GroupOwner::from_bytes(options.host_key);
    config.service.auth.scheme = auth::Scheme::durin;
    config.service.auth.watchword = kWatchword;
    config.service.auth.server_secret = "test-secret";
    config.snapshot_path = options.snapshot_path;
    config.snapshot_interval_s = options.snapshot_interval_s;
    auto server = server::MikfsServer::create(std::move(config));
    if (!server.ok()) {
        throw std::runtime_error("server create failed: " + server.status().to_string());
    }
    if (auto status = (*server)->start(); !status.ok()) {
        throw std::runtime_error("server start failed: " + status.to_string());
    }
    return std::move(*server);
}

std::unique_ptr<client::MikfsClient> connect_client(const TestPki& pki, std::uint16_t port,
                                                    const std::string& watchword)
{
    auto client = client::MikfsClient::connect("127.0.0.1", port, {pki.ca_cert, {}, {}, {}});
    if (!client.ok()) {
        throw std::runtime_error("client connect failed: " + client.status().to_string());
    }
    if (!watchword.empty()) {
        if (auto status = (*client)->authenticate_durin(watchword); !status.ok()) {
            throw std::runtime_error("authentication failed: " + status.to_string());
        }
    }
    return std::move(*client);
}

core::Ownership ownership(const std::string& host_key, const std::string& user_key)
{
    return {*core::GroupOwner::from_bytes(host_key), *core::GroupOwner::from_bytes(user_key)};
}

}  // namespace mikfs::testing
