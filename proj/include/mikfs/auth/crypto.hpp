#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace mikfs::auth {

// Bytes from the OpenSSL CSPRNG; throws std::runtime_error if it fails.
std::string random_bytes(std::size_t n);

std::string sha256(std::string_view data);
std::string hmac_sha256(std::string_view key, std::string_view message);

// Compares digests of both inputs with CRYPTO_memcmp, so neither the
// position of the first difference nor a length mismatch shows in timing.
bool constant_time_equal(std::string_view a, std::string_view b);

std::string to_hex(std::string_view bytes);
std::optional<std::string> from_hex(std::string_view hex);

// UserPassword scheme: verifier = SHA-256(salt || password),
// proof = HMAC-SHA-256(key = verifier, message = nonce).
std::string password_verifier(std::string_view salt, std::string_view password);
std::string password_proof(std::string_view verifier, std::string_view nonce);

}  // namespace mikfs::auth
