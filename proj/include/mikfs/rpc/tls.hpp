#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mikfs/core/status.hpp"

typedef struct ssl_st SSL;
typedef struct ssl_ctx_st SSL_CTX;

namespace mikfs::rpc {

// Connection-level failure: refused, reset, handshake or framing error.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TlsServerConfig {
    std::string cert_path;
    std::string key_path;
    // When set, clients must present a certificate signed by this CA.
    std::string client_ca_path;
};

struct TlsClientConfig {
    // Exactly one of ca_path / pinned_cert_path must be set.
    std::string ca_path;
    std::string pinned_cert_path;
    std::string client_cert_path;
    std::string client_key_path;
};

class TlsContext {
public:
    static core::Result<std::shared_ptr<TlsContext>> server(const TlsServerConfig& config);
    static core::Result<std::shared_ptr<TlsContext>> client(const TlsClientConfig& config);

    ~TlsContext();
    TlsContext(const TlsContext&) = delete;
    TlsContext& operator=(const TlsContext&) = delete;

    SSL_CTX* native() const { return ctx_; }
    bool is_server() const { return server_; }
    // DER bytes of the pinned certificate, empty when verifying against a CA.
    const std::string& pinned_der() const { return pinned_der_; }

private:
    TlsContext(SSL_CTX* ctx, bool server) : ctx_(ctx), server_(server) {}

    SSL_CTX* ctx_;
    bool server_;
    std::string pinned_der_;
};

// One TLS connection over a TCP socket. Only shutdown() may be called from a
// thread other than the one doing reads and writes.
class TlsStream {
public:
    static std::unique_ptr<TlsStream> connect(const std::shared_ptr<TlsContext>& ctx, const std::string& host,
                                              std::uint16_t port);
    // The caller keeps ownership of fd and closes it after the stream is gone.
    static std::unique_ptr<TlsStream> accept(const std::shared_ptr<TlsContext>& ctx, int fd);

    ~TlsStream();
    TlsStream(const TlsStream&) = delete;
    TlsStream& operator=(const TlsStream&) = delete;

    // Throw TransportError on failure or EOF.
    void read_exact(char* out, std::size_t n);
    void write_all(std::string_view data);

    // Unblocks any pending read or write; the stream is dead afterwards.
    void shutdown();

    // True when the peer has sent data or hung up, waiting up to timeout.
    bool readable(std::chrono::milliseconds timeout) const;

    int fd() const { return fd_; }

private:
    TlsStream(std::shared_ptr<TlsContext> ctx, SSL* ssl, int fd) : ctx_(std::move(ctx)), ssl_(ssl), fd_(fd) {}

    std::shared_ptr<TlsContext> ctx_;
    SSL* ssl_;
    int fd_;
    bool owns_fd_ = true;
};

std::string openssl_error_string();

}  // namespace mikfs::rpc
