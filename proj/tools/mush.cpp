// mush: the interactive mikfs shell.

#include <unistd.h>

#include <iostream>

#include <CLI11.hpp>

#include "mikfs/client/shell.hpp"
#include "mikfs/importexport/client.hpp"
#include "secret_prompt.hpp"

using namespace mikfs;

int main(int argc, char** argv)
{
    CLI::App app{"mush: a shell for mikfs servers"};
    client::ShellOptions options;
    std::string url;
    std::string script;
    std::string importexport_endpoint;
    std::string cache_file = client::default_cache_path().string();

    app.add_option("url", url, "Open mikfs://host[:port][/path] before anything else");
    app.add_option("-c", script, "Run 'cmd; cmd; ...' and exit");
    auto* ca = app.add_option("--ca", options.tls.ca_path, "Trust server certificates signed by this CA")
                   ->envname("MIKFS_CA");
    auto* pin = app.add_option("--insecure-pin", options.tls.pinned_cert_path,
                               "Trust exactly this server certificate (no CA check)")
                    ->envname("MIKFS_PIN");
    ca->excludes(pin);
    app.add_option("--client-cert", options.tls.client_cert_path, "Client certificate for mutual TLS")
        ->envname("MIKFS_CLIENT_CERT");
    app.add_option("--client-key", options.tls.client_key_path, "Client key for mutual TLS")
        ->envname("MIKFS_CLIENT_KEY");
    app.add_option("--importexport", importexport_endpoint, "ImportExport service as host:port")
        ->envname("MIKFS_IMPORTEXPORT");
    app.add_option("--cache", cache_file, "Local ownership-handle file")->capture_default_str();
    app.add_option("--chunk-threshold", options.chunk_threshold, "Transfers above this many bytes use chunks")
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    if (options.tls.ca_path.empty() && options.tls.pinned_cert_path.empty()) {
        std::cerr << "mush: give --ca or --insecure-pin\n";
        return 2;
    }
    options.ask_secret = [](const std::string& prompt) { return tools::read_secret(prompt); };

    std::unique_ptr<importexport::ImportExportClient> service;
    if (!importexport_endpoint.empty()) {
        const auto colon = importexport_endpoint.rfind(':');
        int port = 0;
        try {
            port = colon == std::string::npos ? 0 : std::stoi(importexport_endpoint.substr(colon + 1));
        } catch (const std::exception&) {
        }
        if (port < 1 || port > 65535) {
            std::cerr << "mush: --importexport wants host:port\n";
            return 2;
        }
        auto connected = importexport::ImportExportClient::connect(importexport_endpoint.substr(0, colon),
                                                                   static_cast<std::uint16_t>(port), options.tls);
        if (!connected.ok()) {
            std::cerr << "mush: " << connected.status().to_string() << '\n';
            return 2;
        }
        service = std::move(*connected);
    }
    auto cache = client::OwnershipCache::open(cache_file, std::move(service), &std::cerr);
    if (!cache.ok()) {
        std::cerr << "mush: " << cache.status().to_string() << '\n';
        return 2;
    }

    client::Shell shell(std::move(options), std::move(*cache), std::cout, std::cerr);
    bool ok = true;
    if (!url.empty()) {
        ok = shell.execute("open '" + url + "'");
    }
    if (!script.empty()) {
        ok = shell.run_script(script) && ok;
    } else {
        ok = shell.run_interactive(std::cin, ::isatty(STDIN_FILENO) != 0) && ok;
    }
    return ok ? 0 : 1;
}
