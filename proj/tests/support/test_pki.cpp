#include "test_pki.hpp"

#include <unistd.h>

#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509v3.h>

#include <cstdio>
#include <stdexcept>

namespace mikfs::testing {

namespace {

EVP_PKEY* new_key()
{
    EVP_PKEY* key = EVP_EC_gen("P-256");
    if (key == nullptr) {
        throw std::runtime_error("EC key generation failed");
    }
    return key;
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value)
{
    X509V3_CTX ctx;
    X509V3_set_ctx_nodb(&ctx);
    X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
    X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
    if (ext == nullptr) {
        throw std::runtime_error("bad certificate extension");
    }
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
}

X509* make_cert(EVP_PKEY* key, const char* common_name, X509* issuer, EVP_PKEY* issuer_key, bool is_ca,
                const char* san, long serial)
{
    X509* cert = X509_new();
    X509_set_version(cert, 2);
    ASN1_INTEGER_set(X509_get_serialNumber(cert), serial);
    X509_gmtime_adj(X509_getm_notBefore(cert), -3600);
    X509_gmtime_adj(X509_getm_notAfter(cert), 3600L * 24 * 365);
    X509_set_pubkey(cert, key);
    X509_NAME* name = X509_get_subject_name(cert);
    X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC, reinterpret_cast<const unsigned char*>(common_name), -1,
                               -1, 0);
    X509_set_issuer_name(cert, issuer != nullptr ? X509_get_subject_name(issuer) : name);
    X509* signer = issuer != nullptr ? issuer : cert;
    add_extension(cert, signer, NID_basic_constraints, is_ca ? "critical,CA:TRUE" : "CA:FALSE");
    if (is_ca) {
        add_extension(cert, signer, NID_key_usage, "critical,keyCertSign,cRLSign");
    } else {
        add_extension(cert, signer, NID_key_usage, "critical,digitalSignature");
    }
    if (san != nullptr) {
        add_extension(cert, signer, NID_subject_alt_name, san);
    }
    if (X509_sign(cert, issuer_key != nullptr ? issuer_key : key, EVP_sha256()) == 0) {
        throw std::runtime_error("certificate signing failed");
    }
    return cert;
}

void write_cert(const std::filesystem::path& path, X509* cert)
{
    FILE* file = std::fopen(path.c_str(), "wb");
    PEM_write_X509(file, cert);
    std::fclose(file);
}

void write_key(const std::filesystem::path& path, EVP_PKEY* key)
{
    FILE* file = std::fopen(path.c_str(), "wb");
    PEM_write_PrivateKey(file, key, nullptr, nullptr, 0, nullptr, nullptr);
    std::fclose(file);
}

}  // namespace

TestPki make_test_pki(const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    TestPki pki;
    pki.dir = dir;
    pki.ca_cert = (dir / "ca.pem").string();
    pki.server_cert = (dir / "server.pem").string();
    pki.server_key = (dir / "server.key").string();
    pki.client_cert = (dir / "client.pem").string();
    pki.client_key = (dir / "client.key").string();
    pki.rogue_client_cert = (dir / "rogue.pem").string();
    pki.rogue_client_key = (dir / "rogue.key").string();

    EVP_PKEY* ca_key = new_key();
    X509* ca = make_cert(ca_key, "mikfs test CA", nullptr, nullptr, true, nullptr, 1);
    EVP_PKEY* server_key = new_key();
    X509* server = make_cert(server_key, "localhost", ca, ca_key, false, "DNS:localhost,IP:127.0.0.1", 2);
    EVP_PKEY* client_key = new_key();
    X509* client = make_cert(client_key, "mikfs test client", ca, ca_key, false, nullptr, 3);
    EVP_PKEY* rogue_ca_key = new_key();
    X509* rogue_ca = make_cert(rogue_ca_key, "rogue CA", nullptr, nullptr, true, nullptr, 4);
    EVP_PKEY* rogue_key = new_key();
    X509* rogue = make_cert(rogue_key, "rogue client", rogue_ca, rogue_ca_key, false, nullptr, 5);

    write_cert(pki.ca_cert, ca);
    write_cert(pki.server_cert, server);
    write_key(pki.server_key, server_key);
    write_cert(pki.client_cert, client);
    write_key(pki.client_key, client_key);
    write_cert(pki.rogue_client_cert, rogue);
    write_key(pki.rogue_client_key, rogue_key);

    for (X509* cert : {ca, server, client, rogue_ca, rogue}) {
        X509_free(cert);
    }
    for (EVP_PKEY* key : {ca_key, server_key, client_key, rogue_ca_key, rogue_key}) {
        EVP_PKEY_free(key);
    }
    return pki;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() /
                     ("mikfs-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace mikfs::testing
