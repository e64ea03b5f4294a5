#include "mikfs/rpc/tls.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/err.h>
#include <openssl/pem.h>
#include <openssl/ssl.h>
#include <openssl/x509v3.h>

#include <algorithm>
#include <csignal>
#include <cstring>
#include <cstdio>
#include <mutex>

namespace mikfs::rpc {

namespace {

constexpr int kHandshakeTimeoutSeconds = 10;
constexpr std::size_t kMaxWrite = 1 << 20;

void ignore_sigpipe()
{
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

core::Status tls_error(std::string what)
{
    return core::make_error(core::StatusCode::invalid_argument, what + ": " + openssl_error_string());
}

void set_io_timeout(int fd, int seconds)
{
    timeval tv{};
    tv.tv_sec = seconds;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void set_nodelay(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

bool is_ip_literal(const std::string& host)
{
    in6_addr v6{};
    in_addr v4{};
    return ::inet_pton(AF_INET, host.c_str(), &v4) == 1 || ::inet_pton(AF_INET6, host.c_str(), &v6) == 1;
}

core::Result<std::string> read_cert_der(const std::string& path)
{
    FILE* file = std::fopen(path.c_str(), "rb");
    if (file == nullptr) {
        return core::make_error(core::StatusCode::not_found, "cannot open certificate " + path);
    }
    X509* cert = PEM_read_X509(file, nullptr, nullptr, nullptr);
    std::fclose(file);
    if (cert == nullptr) {
        return tls_error("cannot parse certificate " + path);
    }
    unsigned char* der = nullptr;
    const int length = i2d_X509(cert, &der);
    X509_free(cert);
    if (length <= 0) {
        return tls_error("cannot encode certificate " + path);
    }
    std::string out(reinterpret_cast<char*>(der), static_cast<std::size_t>(length));
    OPENSSL_free(der);
    return out;
}

core::Status load_identity(SSL_CTX* ctx, const std::string& cert, const std::string& key)
{
    if (SSL_CTX_use_certificate_chain_file(ctx, cert.c_str()) != 1) {
        return tls_error("cannot load certificate " + cert);
    }
    if (SSL_CTX_use_PrivateKey_file(ctx, key.c_str(), SSL_FILETYPE_PEM) != 1) {
        return tls_error("cannot load private key " + key);
    }
    if (SSL_CTX_check_private_key(ctx) != 1) {
        return tls_error("private key does not match certificate");
    }
    return {};
}

}  // namespace

std::string openssl_error_string()
{
    std::string out;
    while (unsigned long code = ERR_get_error()) {
        char buffer[256];
        ERR_error_string_n(code, buffer, sizeof buffer);
        if (!out.empty()) {
            out += "; ";
        }
        out += buffer;
    }
    return out.empty() ? "unknown TLS error" : out;
}

core::Result<std::shared_ptr<TlsContext>> TlsContext::server(const TlsServerConfig& config)
{
    ignore_sigpipe();
    SSL_CTX* ctx = SSL_CTX_new(TLS_server_method());
    if (ctx == nullptr) {
        return tls_error("SSL_CTX_new");
    }
    std::shared_ptr<TlsContext> out(new TlsContext(ctx, true));
    SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
    if (auto status = load_identity(ctx, config.cert_path, config.key_path); !status.ok()) {
        return status;
    }
    if (!config.client_ca_path.empty()) {
        if (SSL_CTX_load_verify_locations(ctx, config.client_ca_path.c_str(), nullptr) != 1) {
            return tls_error("cannot load client CA " + config.client_ca_path);
        }
        SSL_CTX_set_client_CA_list(ctx, SSL_load_client_CA_file(config.client_ca_path.c_str()));
        SSL_CTX_set_verify(ctx, SSL_VERIFY_PEER | SSL_VERIFY_FAIL_IF_NO_PEER_CERT, nullptr);
    }
    return out;
}

core::Result<std::shared_ptr<TlsContext>> TlsContext::client(const TlsClientConfig& config)
{
    ignore_sigpipe();
    if (config.ca_path.empty() == config.pinned_cert_path.empty()) {
        return core::make_error(core::StatusCode::invalid_argument,
                                "exactly one of a CA file or a pinned certificate is required");
    }
    SSL_CTX* ctx = SSL_CTX_new(TLS_client_method());
    if (ctx == nullptr) {
        return tls_error("SSL_CTX_new");
    }
    std::shared_ptr<TlsContext> out(new TlsContext(ctx, false));
    SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
    if (!config.ca_path.empty()) {
        if (SSL_CTX_load_verify_locations(ctx, config.ca_path.c_str(), nullptr) != 1) {
            return tls_error("cannot load CA " + config.ca_path);
        }
        SSL_CTX_set_verify(ctx, SSL_VERIFY_PEER, nullptr);
    } else {
        auto der = read_cert_der(config.pinned_cert_path);
        if (!der.ok()) {
            return der.status();
        }
        out->pinned_der_ = std::move(der).value();
        // Checked by comparing the peer certificate after the handshake.
        SSL_CTX_set_verify(ctx, SSL_VERIFY_NONE, nullptr);
    }
    if (!config.client_cert_path.empty() || !config.client_key_path.empty()) {
        if (auto status = load_identity(ctx, config.client_cert_path, config.client_key_path); !status.ok()) {
            return status;
        }
    }
    return out;
}

TlsContext::~TlsContext()
{
    SSL_CTX_free(ctx_);
}

std::unique_ptr<TlsStream> TlsStream::connect(const std::shared_ptr<TlsContext>& ctx, const std::string& host,
                                              std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string service = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &found); rc != 0) {
        throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    int last_errno = 0;
    for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        set_io_timeout(fd, kHandshakeTimeoutSeconds);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        last_errno = errno;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(found);
    if (fd < 0) {
        throw TransportError("cannot connect to " + host + ":" + service + ": " + std::strerror(last_errno));
    }
    set_nodelay(fd);

    SSL* ssl = SSL_new(ctx->native());
    std::unique_ptr<TlsStream> stream(new TlsStream(ctx, ssl, fd));
    SSL_set_fd(ssl, fd);
    if (ctx->pinned_der().empty()) {
        if (is_ip_literal(host)) {
            X509_VERIFY_PARAM_set1_ip_asc(SSL_get0_param(ssl), host.c_str());
        } else {
            SSL_set1_host(ssl, host.c_str());
        }
    }
    if (!is_ip_literal(host)) {
        SSL_set_tlsext_host_name(ssl, host.c_str());
    }
    if (SSL_connect(ssl) != 1) {
        throw TransportError("TLS handshake with " + host + " failed: " + openssl_error_string());
    }
    if (!ctx->pinned_der().empty()) {
        X509* peer = SSL_get1_peer_certificate(ssl);
        std::string der;
        if (peer != nullptr) {
            unsigned char* raw = nullptr;
            const int length = i2d_X509(peer, &raw);
            if (length > 0) {
                der.assign(reinterpret_cast<char*>(raw), static_cast<std::size_t>(length));
                OPENSSL_free(raw);
            }
            X509_free(peer);
        }
        if (der != ctx->pinned_der()) {
            throw TransportError("server certificate does not match the pinned certificate");
        }
    } else if (SSL_get_verify_result(ssl) != X509_V_OK) {
        throw TransportError("server certificate verification failed");
    }
    set_io_timeout(fd, 0);
    return stream;
}

std::unique_ptr<TlsStream> TlsStream::accept(const std::shared_ptr<TlsContext>& ctx, int fd)
{
    set_nodelay(fd);
    set_io_timeout(fd, kHandshakeTimeoutSeconds);
    SSL* ssl = SSL_new(ctx->native());
    std::unique_ptr<TlsStream> stream(new TlsStream(ctx, ssl, fd));
    stream->owns_fd_ = false;
    SSL_set_fd(ssl, fd);
    if (SSL_accept(ssl) != 1) {
        throw TransportError("TLS handshake failed: " + openssl_error_string());
    }
    set_io_timeout(fd, 0);
    return stream;
}

TlsStream::~TlsStream()
{
    SSL_free(ssl_);
    if (owns_fd_) {
        ::close(fd_);
    }
}

void TlsStream::read_exact(char* out, std::size_t n)
{
    while (n > 0) {
        const int chunk = static_cast<int>(std::min(n, kMaxWrite));
        const int got = SSL_read(ssl_, out, chunk);
        if (got <= 0) {
            const int err = SSL_get_error(ssl_, got);
            ERR_clear_error();
            throw TransportError(err == SSL_ERROR_ZERO_RETURN ? "connection closed by peer" : "connection lost");
        }
        out += got;
        n -= static_cast<std::size_t>(got);
    }
}

void TlsStream::write_all(std::string_view data)
{
    while (!data.empty()) {
        const int chunk = static_cast<int>(std::min(data.size(), kMaxWrite));
        const int put = SSL_write(ssl_, data.data(), chunk);
        if (put <= 0) {
            ERR_clear_error();
            throw TransportError("connection lost while writing");
        }
        data.remove_prefix(static_cast<std::size_t>(put));
    }
}

void TlsStream::shutdown()
{
    ::shutdown(fd_, SHUT_RDWR);
}

bool TlsStream::readable(std::chrono::milliseconds timeout) const
{
    if (SSL_pending(ssl_) > 0) {
        return true;
    }
    pollfd pfd{};
    pfd.fd = fd_;
    pfd.events = POLLIN | POLLRDHUP;
    const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    return rc > 0;
}

}  // namespace mikfs::rpc
