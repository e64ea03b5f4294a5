#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mikfs/client/client.hpp"
#include "mikfs/client/ownership_cache.hpp"
#include "mikfs/rpc/tls.hpp"

namespace mikfs::client {

inline constexpr std::size_t kDefaultChunkThreshold = 256 * 1024;
inline constexpr std::uint32_t kDefaultFilePermissions = 0x0FF4;       // octal 7764
inline constexpr std::uint32_t kDefaultDirectoryPermissions = 0x0FFD;  // octal 7775

struct ShellOptions {
    rpc::TlsClientConfig tls;
    // Transfers larger than this use the chunked methods.
    std::size_t chunk_threshold = kDefaultChunkThreshold;
    // Asked for watchwords and passwords that the environment does not
    // supply (MIKFS_WATCHWORD, MIKFS_PASSWORD).
    std::function<std::string(const std::string& prompt)> ask_secret;
};

// Splits a command line into words. Single and double quotes group, and a
// backslash escapes the next character outside single quotes.
core::Result<std::vector<std::string>> split_words(std::string_view line);

// Splits a script on ';' and newlines outside quotes; blank commands drop.
std::vector<std::string> split_script(std::string_view script);

// Octal permission mask, at most 13 bits ("17540" = sticky rwx r-x r-- ---).
core::Result<core::PermissionsMask> parse_octal_mask(std::string_view text);

// The mush command interpreter. Each command prints one diagnostic line on
// failure and the shell carries on.
class Shell {
public:
    Shell(ShellOptions options, std::unique_ptr<OwnershipCache> cache, std::ostream& out, std::ostream& err);
    ~Shell();

    Shell(const Shell&) = delete;
    Shell& operator=(const Shell&) = delete;

    // Runs one command line; false when it failed.
    bool execute(std::string_view line);
    // Every command in order; true only if all of them succeeded.
    bool run_script(std::string_view script);
    // Prompts on `out` while reading lines from `in`.
    bool run_interactive(std::istream& in, bool prompt);

    bool quit_requested() const { return quit_; }
    OwnershipCache& cache() { return *cache_; }
    const std::string& cwd() const { return cwd_; }

private:
    using Args = std::vector<std::string>;

    core::Status dispatch(const Args& args);
    core::Status require_session() const;
    std::string absolute(const std::string& path) const;
    std::string parent_of(const std::string& path) const;
    core::Ownership caller_for(const std::string& path);
    core::Result<Creation> creation(std::optional<core::PermissionsMask> mask, std::uint32_t fallback);
    void print(const std::string& line);
    void stop_watch();

    core::Status cmd_help(const Args& args);
    core::Status cmd_open(const Args& args);
    core::Status cmd_login(const Args& args);
    core::Status cmd_logout(const Args& args);
    core::Status cmd_info(const Args& args);
    core::Status cmd_ls(const Args& args);
    core::Status cmd_cd(const Args& args);
    core::Status cmd_pwd(const Args& args);
    core::Status cmd_get(const Args& args);
    core::Status cmd_put(const Args& args);
    core::Status cmd_mkdir(const Args& args);
    core::Status cmd_rm(const Args& args);
    core::Status cmd_mv(const Args& args);
    core::Status cmd_cp(const Args& args);
    core::Status cmd_chmod(const Args& args);
    core::Status cmd_stat(const Args& args);
    core::Status cmd_attr(const Args& args);
    core::Status cmd_zipget(const Args& args);
    core::Status cmd_zipput(const Args& args);
    core::Status cmd_watch(const Args& args);
    core::Status cmd_find(const Args& args);
    core::Status cmd_handles(const Args& args);
    core::Status cmd_sleep(const Args& args);

    ShellOptions options_;
    std::unique_ptr<OwnershipCache> cache_;
    std::ostream& out_;
    std::ostream& err_;
    std::mutex print_mutex_;

    std::unique_ptr<MikfsClient> client_;
    std::string site_;  // "host:port" of the open connection
    std::string cwd_ = "/";
    bool logged_in_ = false;
    bool quit_ = false;

    std::unique_ptr<ChangeStream> watch_stream_;
    std::thread watch_thread_;
};

}  // namespace mikfs::client
