// mikfs-importexport: the ownership-handle metadata service.

#include <signal.h>

#include <iostream>

#include <CLI11.hpp>

#include "mikfs/importexport/service.hpp"

using namespace mikfs;

int main(int argc, char** argv)
{
    CLI::App app{"mikfs-importexport: caches ownership handles by site and path"};
    importexport::ImportExportConfig config;
    std::string state = "importexport.json";
    bool memory_only = false;

    app.add_option("--bind", config.bind_address, "Address to listen on; keep it private")
        ->envname("MIKFS_IE_BIND")
        ->capture_default_str();
    app.add_option("--port", config.port, "TCP port (0 picks one)")->envname("MIKFS_IE_PORT")->capture_default_str();
    app.add_option("--cert", config.tls.cert_path, "Server certificate (PEM)")->envname("MIKFS_TLS_CERT")->required();
    app.add_option("--key", config.tls.key_path, "Server private key (PEM)")->envname("MIKFS_TLS_KEY")->required();
    app.add_option("--client-ca", config.tls.client_ca_path, "Require client certificates signed by this CA")
        ->envname("MIKFS_TLS_CLIENT_CA");
    app.add_option("--state", state, "State file, rewritten after every change")
        ->envname("MIKFS_IE_STATE")
        ->capture_default_str();
    app.add_flag("--memory-only", memory_only, "Do not persist");
    CLI11_PARSE(app, argc, argv);
    if (!memory_only) {
        config.state_path = state;
    }

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto server = importexport::ImportExportServer::create(std::move(config));
    if (!server.ok()) {
        std::cerr << "mikfs-importexport: " << server.status().to_string() << '\n';
        return 1;
    }
    if (auto status = (*server)->start(); !status.ok()) {
        std::cerr << "mikfs-importexport: " << status.to_string() << '\n';
        return 1;
    }
    std::cout << "mikfs-importexport listening on port " << (*server)->port() << std::endl;
    int received = 0;
    sigwait(&signals, &received);
    (*server)->stop();
    return 0;
}
