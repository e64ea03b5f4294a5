// mikfs-server: serves one in-memory mikfs tree over TLS.

#include <signal.h>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "mikfs/auth/crypto.hpp"
#include "mikfs/core/file_io.hpp"
#include "mikfs/server/server.hpp"

using namespace mikfs;

namespace {

// Reads a hex secret from path, creating it with `bytes` random bytes on
// first use.
core::Result<std::string> load_or_create_secret(const std::filesystem::path& path, std::size_t bytes)
{
    if (std::filesystem::exists(path)) {
        auto text = core::read_file(path);
        if (!text.ok()) {
            return text.status();
        }
        std::string hex = *text;
        while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) {
            hex.pop_back();
        }
        auto raw = auth::from_hex(hex);
        if (!raw || raw->empty()) {
            return core::make_error(core::StatusCode::invalid_argument, path.string() + " is not a hex key");
        }
        return *raw;
    }
    std::string raw = auth::random_bytes(bytes);
    if (auto status = core::write_file_atomic(path, auth::to_hex(raw) + "\n"); !status.ok()) {
        return status;
    }
    std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write);
    return raw;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mikfs-server: a remote virtual filesystem over TLS"};
    server::ServerConfig config;
    std::string mode = "rw";
    std::string scheme = "durin";
    std::string users_file;
    std::string state_dir = ".";
    bool no_snapshot = false;

    app.add_option("--bind", config.bind_address, "Address to listen on")->envname("MIKFS_BIND")->capture_default_str();
    app.add_option("--port", config.port, "TCP port (0 picks one)")->envname("MIKFS_PORT")->capture_default_str();
    app.add_option("--cert", config.tls.cert_path, "Server certificate (PEM)")->envname("MIKFS_TLS_CERT")->required();
    app.add_option("--key", config.tls.key_path, "Server private key (PEM)")->envname("MIKFS_TLS_KEY")->required();
    app.add_option("--client-ca", config.tls.client_ca_path, "Require client certificates signed by this CA")
        ->envname("MIKFS_TLS_CLIENT_CA");
    app.add_option("--mode", mode, "rw, ro or ao")->envname("MIKFS_MODE")->capture_default_str();
    app.add_option("--auth", scheme, "durin or user-password")->envname("MIKFS_AUTH")->capture_default_str();
    app.add_option("--users", users_file, "Users file for user-password (see mikfs-passwd)")->envname("MIKFS_USERS");
    app.add_option("--state-dir", state_dir, "Holds host.key, server.secret and tree.snapshot")
        ->envname("MIKFS_STATE_DIR")
        ->capture_default_str();
    app.add_option("--snapshot-interval", config.snapshot_interval_s, "Seconds between snapshots (0: only on exit)")
        ->envname("MIKFS_SNAPSHOT_INTERVAL")
        ->capture_default_str();
    app.add_flag("--no-snapshot", no_snapshot, "Keep the tree in memory only");
    CLI11_PARSE(app, argc, argv);

    auto parsed_mode = server::parse_mode(mode);
    if (!parsed_mode) {
        std::cerr << "mikfs-server: unknown mode '" << mode << "'\n";
        return 2;
    }
    config.service.mode = *parsed_mode;

    std::error_code error;
    std::filesystem::create_directories(state_dir, error);
    auto host_key = load_or_create_secret(std::filesystem::path(state_dir) / "host.key", 16);
    auto secret = load_or_create_secret(std::filesystem::path(state_dir) / "server.secret", 32);
    if (!host_key.ok() || !secret.ok()) {
        std::cerr << "mikfs-server: " << (host_key.ok() ? secret.status() : host_key.status()).to_string() << '\n';
        return 1;
    }
    config.service.host_key = *core::GroupOwner::from_bytes(*host_key);
    config.service.auth.server_secret = *secret;

    if (scheme == "durin") {
        const char* watchword = std::getenv("MIKFS_WATCHWORD");
        if (watchword == nullptr || *watchword == '\0') {
            std::cerr << "mikfs-server: the durin scheme needs MIKFS_WATCHWORD\n";
            return 2;
        }
        config.service.auth.scheme = auth::Scheme::durin;
        config.service.auth.watchword = watchword;
    } else if (scheme == "user-password") {
        auto users = auth::UserTable::load(users_file);
        if (!users.ok()) {
            std::cerr << "mikfs-server: " << users.status().to_string() << '\n';
            return 2;
        }
        config.service.auth.scheme = auth::Scheme::user_password;
        config.service.auth.users = std::move(*users);
    } else {
        std::cerr << "mikfs-server: unknown auth scheme '" << scheme << "'\n";
        return 2;
    }
    if (!no_snapshot) {
        config.snapshot_path = std::filesystem::path(state_dir) / "tree.snapshot";
    }

    // Block the stop signals before any thread starts so only sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto server = server::MikfsServer::create(std::move(config));
    if (!server.ok()) {
        std::cerr << "mikfs-server: " << server.status().to_string() << '\n';
        return 1;
    }
    if (auto status = (*server)->start(); !status.ok()) {
        std::cerr << "mikfs-server: " << status.to_string() << '\n';
        return 1;
    }
    std::cout << "mikfs-server listening on port " << (*server)->port() << " (" << mode << ", " << scheme << ")"
              << std::endl;

    int received = 0;
    sigwait(&signals, &received);
    std::cout << "mikfs-server stopping" << std::endl;
    if (auto status = (*server)->stop(); !status.ok()) {
        std::cerr << "mikfs-server: final snapshot failed: " << status.to_string() << '\n';
        return 1;
    }
    return 0;
}
