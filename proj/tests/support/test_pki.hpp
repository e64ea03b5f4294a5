#pragma once

#include <filesystem>
#include <string>

namespace mikfs::testing {

// A throwaway CA plus server and client certificates (EC P-256). The server
// certificate covers localhost and 127.0.0.1.
struct TestPki {
    std::filesystem::path dir;
    std::string ca_cert;
    std::string server_cert;
    std::string server_key;
    std::string client_cert;
    std::string client_key;
    // Signed by a different CA; must be rejected by mutual TLS.
    std::string rogue_client_cert;
    std::string rogue_client_key;
};

TestPki make_test_pki(const std::filesystem::path& dir);

// Fresh empty directory under the system temp dir, unique per process.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace mikfs::testing
