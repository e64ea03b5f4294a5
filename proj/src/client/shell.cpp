#include "mikfs/client/shell.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mikfs/core/file_io.hpp"
#include "mikfs/importexport/store.hpp"

namespace mikfs::client {

using core::Status;
using core::StatusCode;

namespace {

Status usage(const char* text) { return core::make_error(StatusCode::invalid_argument, std::string("usage: ") + text); }

std::string format_time(core::Timestamp ns)
{
    const std::time_t seconds = static_cast<std::time_t>(ns / 1'000'000'000ULL);
    std::tm utc{};
    gmtime_r(&seconds, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

std::string octal(core::PermissionsMask mask)
{
    std::ostringstream out;
    out << std::oct << mask.bits();
    return out.str();
}

std::string basename_of(const std::string& path)
{
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string_view change_kind_name(v1::ChangeKind kind)
{
    switch (kind) {
    case v1::CHANGE_KIND_FILE_CREATED: return "FileCreated";
    case v1::CHANGE_KIND_FILE_MODIFIED: return "FileModified";
    case v1::CHANGE_KIND_FILE_DELETED: return "FileDeleted";
    case v1::CHANGE_KIND_FILE_MOVED: return "FileMoved";
    case v1::CHANGE_KIND_DIR_CREATED: return "DirCreated";
    case v1::CHANGE_KIND_DIR_DELETED: return "DirDeleted";
    case v1::CHANGE_KIND_DIR_MOVED: return "DirMoved";
    case v1::CHANGE_KIND_PERMISSIONS_CHANGED: return "PermissionsChanged";
    case v1::CHANGE_KIND_ATTRIBUTES_CHANGED: return "AttributesChanged";
    default: return "Unknown";
    }
}

core::Result<std::string> read_local(const std::string& path)
{
    auto bytes = core::read_file(path);
    if (!bytes.ok()) {
        return core::make_error(StatusCode::not_found, "cannot read local file " + path);
    }
    return bytes;
}

Status write_local(const std::string& path, const std::string& bytes)
{
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) {
        return core::make_error(StatusCode::invalid_argument, "cannot write local file " + path);
    }
    return {};
}

// Strips a leading "-m OCTAL" from args.
core::Result<std::optional<core::PermissionsMask>> take_mode(std::vector<std::string>& args)
{
    if (args.size() >= 3 && args[1] == "-m") {
        auto mask = parse_octal_mask(args[2]);
        if (!mask.ok()) {
            return mask.status();
        }
        args.erase(args.begin() + 1, args.begin() + 3);
        return std::optional<core::PermissionsMask>(*mask);
    }
    return std::optional<core::PermissionsMask>();
}

constexpr const char* kHelp =
    "open URL                    connect to mikfs://host[:port][/path]\n"
    "login [USER]                Durin without USER, UserPassword with it\n"
    "logout | info | pwd | cd PATH | ls [PATH]\n"
    "get REMOTE [LOCAL]          download (always streamed in chunks)\n"
    "put [-m OCTAL] LOCAL [REMOTE]\n"
    "mkdir [-m OCTAL] PATH\n"
    "rm [-r] PATH | mv FROM TO | cp [-m OCTAL] FROM TO\n"
    "chmod OCTAL PATH            13-bit mask in octal, e.g. 17540\n"
    "stat PATH\n"
    "attr set PATH NAME VALUE | attr get PATH [NAME] | attr del PATH NAME\n"
    "zipget REMOTE LOCAL.zip | zipput [-m OCTAL] LOCAL.zip REMOTE\n"
    "watch [PATH [GLOB]] | watch stop\n"
    "find [PATH] [--name GLOB] [--content TEXT] [--attr NAME[=VALUE]]... [--max N]\n"
    "handles export FILE [--mask-user] [--mask-host] [--filter GLOB]\n"
    "handles import FILE\n"
    "sleep MS | help | quit\n";

}  // namespace

core::Result<std::vector<std::string>> split_words(std::string_view line)
{
    std::vector<std::string> words;
    std::string current;
    bool in_word = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote == '\'') {
            if (c == '\'') {
                quote = 0;
            } else {
                current += c;
            }
        } else if (c == '\\') {
            if (i + 1 == line.size()) {
                return core::make_error(StatusCode::invalid_argument, "trailing backslash");
            }
            current += line[++i];
            in_word = true;
        } else if (quote == '"') {
            if (c == '"') {
                quote = 0;
            } else {
                current += c;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
            in_word = true;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            if (in_word) {
                words.push_back(std::move(current));
                current.clear();
                in_word = false;
            }
        } else {
            current += c;
            in_word = true;
        }
    }
    if (quote != 0) {
        return core::make_error(StatusCode::invalid_argument, "unterminated quote");
    }
    if (in_word) {
        words.push_back(std::move(current));
    }
    return words;
}

std::vector<std::string> split_script(std::string_view script)
{
    std::vector<std::string> commands;
    std::string current;
    char quote = 0;
    auto flush = [&] {
        if (current.find_first_not_of(" \t\r") != std::string::npos) {
            commands.push_back(current);
        }
        current.clear();
    };
    for (std::size_t i = 0; i < script.size(); ++i) {
        const char c = script[i];
        if (quote == 0 && (c == ';' || c == '\n')) {
            flush();
            continue;
        }
        current += c;
        if (c == '\\' && quote != '\'' && i + 1 < script.size()) {
            current += script[++i];
        } else if (quote == 0 && (c == '"' || c == '\'')) {
            quote = c;
        } else if (c == quote) {
            quote = 0;
        }
    }
    flush();
    return commands;
}

core::Result<core::PermissionsMask> parse_octal_mask(std::string_view text)
{
    if (text.empty() || text.size() > 5) {
        return core::make_error(StatusCode::invalid_argument, "permissions must be 1-5 octal digits");
    }
    std::uint32_t bits = 0;
    for (char c : text) {
        if (c < '0' || c > '7') {
            return core::make_error(StatusCode::invalid_argument, "'" + std::string(text) + "' is not octal");
        }
        bits = bits * 8 + static_cast<std::uint32_t>(c - '0');
    }
    return core::PermissionsMask::from_wire(bits);
}

Shell::Shell(ShellOptions options, std::unique_ptr<OwnershipCache> cache, std::ostream& out, std::ostream& err)
    : options_(std::move(options)), cache_(std::move(cache)), out_(out), err_(err)
{
}

Shell::~Shell()
{
    stop_watch();
}

void Shell::print(const std::string& line)
{
    std::lock_guard lock(print_mutex_);
    out_ << line << '\n' << std::flush;
}

bool Shell::execute(std::string_view line)
{
    auto words = split_words(line);
    Status status;
    std::string name = "mush";
    if (!words.ok()) {
        status = words.status();
    } else if (words->empty()) {
        return true;
    } else {
        name = words->front();
        try {
            status = dispatch(*words);
        } catch (const rpc::TransportError& error) {
            status = core::make_error(StatusCode::invalid_argument, std::string("transport failure: ") + error.what());
        } catch (const std::exception& error) {
            status = core::make_error(StatusCode::invalid_argument, error.what());
        }
    }
    if (!status.ok()) {
        std::lock_guard lock(print_mutex_);
        err_ << name << ": " << status.to_string() << '\n' << std::flush;
    }
    return status.ok();
}

bool Shell::run_script(std::string_view script)
{
    bool all_ok = true;
    for (const std::string& command : split_script(script)) {
        all_ok = execute(command) && all_ok;
        if (quit_) {
            break;
        }
    }
    return all_ok;
}

bool Shell::run_interactive(std::istream& in, bool prompt)
{
    bool all_ok = true;
    std::string line;
    while (!quit_) {
        if (prompt) {
            std::lock_guard lock(print_mutex_);
            out_ << "mush> " << std::flush;
        }
        if (!std::getline(in, line)) {
            break;
        }
        all_ok = execute(line) && all_ok;
    }
    return all_ok;
}

Status Shell::dispatch(const Args& args)
{
    using Command = Status (Shell::*)(const Args&);
    static const std::map<std::string, Command, std::less<>> commands = {
        {"help", &Shell::cmd_help},     {"open", &Shell::cmd_open},     {"login", &Shell::cmd_login},
        {"logout", &Shell::cmd_logout}, {"info", &Shell::cmd_info},     {"ls", &Shell::cmd_ls},
        {"cd", &Shell::cmd_cd},         {"pwd", &Shell::cmd_pwd},       {"get", &Shell::cmd_get},
        {"put", &Shell::cmd_put},       {"mkdir", &Shell::cmd_mkdir},   {"rm", &Shell::cmd_rm},
        {"mv", &Shell::cmd_mv},         {"cp", &Shell::cmd_cp},         {"chmod", &Shell::cmd_chmod},
        {"stat", &Shell::cmd_stat},     {"attr", &Shell::cmd_attr},     {"zipget", &Shell::cmd_zipget},
        {"zipput", &Shell::cmd_zipput}, {"watch", &Shell::cmd_watch},   {"find", &Shell::cmd_find},
        {"handles", &Shell::cmd_handles}, {"sleep", &Shell::cmd_sleep},
    };
    if (args[0] == "quit" || args[0] == "exit" || args[0] == "bye") {
        quit_ = true;
        return {};
    }
    auto it = commands.find(args[0]);
    if (it == commands.end()) {
        return core::make_error(StatusCode::invalid_argument, "unknown command (try help)");
    }
    return (this->*it->second)(args);
}

Status Shell::require_session() const
{
    if (client_ == nullptr) {
        return core::make_error(StatusCode::not_authenticated, "not connected; use open URL");
    }
    return {};
}

std::string Shell::absolute(const std::string& path) const
{
    // The current directory is ours alone, so "." and ".." resolve here.
    std::vector<std::string> segments;
    auto push = [&](std::string_view text) {
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t end = std::min(text.find('/', start), text.size());
            const std::string_view part = text.substr(start, end - start);
            if (part == "..") {
                if (!segments.empty()) {
                    segments.pop_back();
                }
            } else if (part != "." && !(part.empty() && (start == 0 || end == text.size()))) {
                segments.emplace_back(part);
            }
            start = end + 1;
        }
    };
    if (path.empty() || path.front() != '/') {
        push(cwd_);
    }
    push(path);
    std::string out;
    for (const auto& segment : segments) {
        out += "/" + segment;
    }
    return out.empty() ? "/" : out;
}

std::string Shell::parent_of(const std::string& path) const
{
    const auto slash = path.find_last_of('/');
    return slash == 0 || slash == std::string::npos ? "/" : path.substr(0, slash);
}

core::Ownership Shell::caller_for(const std::string& path)
{
    return cache_->resolve(site_, path);
}

core::Result<Creation> Shell::creation(std::optional<core::PermissionsMask> mask, std::uint32_t fallback)
{
    auto host = client_->host_write_handle();
    if (!host.ok()) {
        return host.status();
    }
    auto user = cache_->user_key(site_);
    if (!user.ok()) {
        return user.status();
    }
    return Creation{{*host, *user}, mask.value_or(core::PermissionsMask(fallback))};
}

void Shell::stop_watch()
{
    if (watch_stream_ != nullptr) {
        watch_stream_->cancel();
    }
    if (watch_thread_.joinable()) {
        watch_thread_.join();
    }
    watch_stream_.reset();
}

Status Shell::cmd_help(const Args&)
{
    print(std::string(kHelp).substr(0, std::string(kHelp).size() - 1));
    return {};
}

Status Shell::cmd_open(const Args& args)
{
    if (args.size() != 2) {
        return usage("open mikfs://host[:port][/path]");
    }
    auto url = parse_url(args[1]);
    if (!url.ok()) {
        return url.status();
    }
    stop_watch();
    client_.reset();
    logged_in_ = false;
    const std::string host = url->host.find(':') != std::string::npos ? "[" + url->host + "]" : url->host;
    auto site = importexport::canonical_site_id(host + ":" + std::to_string(url->port));
    if (!site.ok()) {
        return site.status();
    }
    auto client = MikfsClient::connect(url->host, url->port, options_.tls);
    if (!client.ok()) {
        return client.status();
    }
    auto info = (*client)->get_api_info();
    if (!info.ok()) {
        return info.status();
    }
    client_ = std::move(*client);
    site_ = *site;
    cwd_ = absolute(url->path.empty() ? "/" : url->path);
    print("connected to " + info->server_name() + " " + info->server_version() + " at " + site_);
    return {};
}

Status Shell::cmd_login(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() > 2) {
        return usage("login [USER]");
    }
    auto secret = [&](const char* variable, const std::string& prompt) -> std::optional<std::string> {
        if (const char* value = std::getenv(variable); value != nullptr) {
            return std::string(value);
        }
        if (options_.ask_secret) {
            return options_.ask_secret(prompt);
        }
        return std::nullopt;
    };
    Status status;
    if (args.size() == 2) {
        auto password = secret("MIKFS_PASSWORD", "password for " + args[1] + ": ");
        if (!password) {
            return core::make_error(StatusCode::invalid_argument, "no password (set MIKFS_PASSWORD)");
        }
        status = client_->authenticate_user(args[1], *password, "mush");
    } else {
        auto watchword = secret("MIKFS_WATCHWORD", "watchword: ");
        if (!watchword) {
            return core::make_error(StatusCode::invalid_argument, "no watchword (set MIKFS_WATCHWORD)");
        }
        status = client_->authenticate_durin(*watchword, "mush");
    }
    if (!status.ok()) {
        return status;
    }
    logged_in_ = true;
    print("logged in to " + site_);
    return {};
}

Status Shell::cmd_logout(const Args&)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    stop_watch();
    auto status = client_->logout();
    logged_in_ = false;
    if (status.ok()) {
        print("logged out");
    }
    return status;
}

Status Shell::cmd_info(const Args&)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    auto info = client_->get_api_info();
    if (!info.ok()) {
        return info.status();
    }
    static const char* modes[] = {"unspecified", "read-write", "read-only", "append-only"};
    static const char* schemes[] = {"unspecified", "durin", "user-password"};
    print(info->server_name() + " " + info->server_version() + ", api " + info->api_version() + ", " +
          modes[info->mutability_mode() & 3] + ", auth " + schemes[std::min(static_cast<int>(info->auth_scheme()), 2)] + ", " +
          std::to_string(info->supported_methods_size()) + " methods");
    return {};
}

Status Shell::cmd_ls(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() > 2) {
        return usage("ls [PATH]");
    }
    const std::string path = absolute(args.size() == 2 ? args[1] : ".");
    auto entries = client_->read_directory(path, caller_for(path));
    if (!entries.ok()) {
        return entries.status();
    }
    for (const auto& entry : *entries) {
        const auto& a = entry.attributes;
        const bool dir = a.kind == core::NodeKind::directory;
        char size[24];
        std::snprintf(size, sizeof size, "%12llu", static_cast<unsigned long long>(a.size));
        print(std::string(dir ? "d " : "- ") + a.permissions.to_string() + " " + size + " " +
              format_time(a.last_modified_time) + " " + entry.name + (dir ? "/" : ""));
    }
    return {};
}

Status Shell::cmd_cd(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() != 2) {
        return usage("cd PATH");
    }
    const std::string path = absolute(args[1]);
    auto permissions = client_->get_permissions(path, caller_for(path));
    if (!permissions.ok()) {
        return permissions.status();
    }
    if (permissions->second != core::NodeKind::directory) {
        return core::make_error(StatusCode::not_a_directory, path);
    }
    cwd_ = path;
    return {};
}

Status Shell::cmd_pwd(const Args&)
{
    print(cwd_);
    return {};
}

Status Shell::cmd_get(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() < 2 || args.size() > 3) {
        return usage("get REMOTE [LOCAL]");
    }
    const std::string remote = absolute(args[1]);
    const std::string local = args.size() == 3 ? args[2] : basename_of(remote);
    auto file = client_->get_file_in_chunks(remote, caller_for(remote));
    if (!file.ok()) {
        return file.status();
    }
    if (auto status = write_local(local, file->content); !status.ok()) {
        return status;
    }
    print(remote + " -> " + local + " (" + std::to_string(file->content.size()) + " bytes)");
    return {};
}

Status Shell::cmd_put(const Args& raw)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    Args args = raw;
    auto mode = take_mode(args);
    if (!mode.ok()) {
        return mode.status();
    }
    if (args.size() < 2 || args.size() > 3) {
        return usage("put [-m OCTAL] LOCAL [REMOTE]");
    }
    std::string target = args.size() == 3 ? args[2] : basename_of(args[1]);
    if (target.ends_with('/')) {
        target += basename_of(args[1]);
    }
    const std::string remote = absolute(target);
    auto content = read_local(args[1]);
    if (!content.ok()) {
        return content.status();
    }
    auto create = creation(*mode, kDefaultFilePermissions);
    if (!create.ok()) {
        return create.status();
    }
    // Overwrites authorize against the file, creations against the parent.
    core::Ownership caller = caller_for(remote);
    if (caller == core::Ownership{}) {
        caller = caller_for(parent_of(remote));
    }
    const std::size_t size = content->size();
    auto result = size > options_.chunk_threshold
                      ? client_->put_file_in_chunks(remote, *content, caller, *create)
                      : client_->put_file(remote, std::move(*content), caller, *create);
    if (!result.ok()) {
        return result.status();
    }
    if (result->created) {
        if (auto status = cache_->remember(site_, remote, create->owner); !status.ok()) {
            return status;
        }
    }
    print(args[1] + " -> " + remote + " (" + std::to_string(size) + " bytes, " +
          (result->created ? "created" : "replaced") + (size > options_.chunk_threshold ? ", chunked" : "") + ")");
    return {};
}

Status Shell::cmd_mkdir(const Args& raw)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    Args args = raw;
    auto mode = take_mode(args);
    if (!mode.ok()) {
        return mode.status();
    }
    if (args.size() != 2) {
        return usage("mkdir [-m OCTAL] PATH");
    }
    const std::string path = absolute(args[1]);
    auto create = creation(*mode, kDefaultDirectoryPermissions);
    if (!create.ok()) {
        return create.status();
    }
    auto made = client_->create_directory(path, caller_for(parent_of(path)), *create);
    if (!made.ok()) {
        return made.status();
    }
    return cache_->remember(site_, path, create->owner);
}

Status Shell::cmd_rm(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    const bool recursive = args.size() == 3 && args[1] == "-r";
    if (args.size() != (recursive ? 3u : 2u)) {
        return usage("rm [-r] PATH");
    }
    const std::string path = absolute(args.back());
    const core::Ownership caller = caller_for(parent_of(path));
    Status status = client_->delete_file(path, caller);
    if (status.code() == StatusCode::not_a_file) {
        status = client_->delete_directory(path, caller, recursive);
    }
    if (!status.ok()) {
        return status;
    }
    return cache_->forget(site_, path, true);
}

Status Shell::cmd_mv(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() != 3) {
        return usage("mv FROM TO");
    }
    const std::string from = absolute(args[1]);
    const std::string to = absolute(args[2]);
    const core::Ownership caller = caller_for(parent_of(from));
    Status status = client_->move_file(from, to, caller);
    if (status.code() == StatusCode::not_a_file) {
        status = client_->move_directory(from, to, caller);
    }
    if (!status.ok()) {
        return status;
    }
    return cache_->rename(site_, from, to);
}

Status Shell::cmd_cp(const Args& raw)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    Args args = raw;
    auto mode = take_mode(args);
    if (!mode.ok()) {
        return mode.status();
    }
    if (args.size() != 3) {
        return usage("cp [-m OCTAL] FROM TO");
    }
    const std::string from = absolute(args[1]);
    const std::string to = absolute(args[2]);
    auto create = creation(*mode, kDefaultFilePermissions);
    if (!create.ok()) {
        return create.status();
    }
    const core::Ownership caller = caller_for(from);
    Status status = client_->copy_file(from, to, caller, *create);
    if (status.code() == StatusCode::not_a_file) {
        if (!mode->has_value()) {
            create->permissions = core::PermissionsMask(kDefaultDirectoryPermissions);
        }
        status = client_->copy_directory(from, to, caller, *create);
    }
    if (!status.ok()) {
        return status;
    }
    return cache_->remember(site_, to, create->owner);
}

Status Shell::cmd_chmod(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() != 3) {
        return usage("chmod OCTAL PATH");
    }
    auto mask = parse_octal_mask(args[1]);
    if (!mask.ok()) {
        return mask.status();
    }
    const std::string path = absolute(args[2]);
    return client_->set_permissions(path, caller_for(path), *mask);
}

Status Shell::cmd_stat(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() != 2) {
        return usage("stat PATH");
    }
    const std::string path = absolute(args[1]);
    auto attributes = client_->get_attributes(path, caller_for(path));
    if (!attributes.ok()) {
        return attributes.status();
    }
    print(path);
    print(std::string("  kind        ") + (attributes->kind == core::NodeKind::directory ? "directory" : "file"));
    print("  size        " + std::to_string(attributes->size));
    print("  modified    " + format_time(attributes->last_modified_time));
    print("  permissions " + attributes->permissions.to_string() + " (" + octal(attributes->permissions) + ")");
    for (const auto& [name, value] : attributes->custom) {
        print("  @" + name + " = " + value);
    }
    return {};
}

Status Shell::cmd_attr(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() < 3) {
        return usage("attr set PATH NAME VALUE | attr get PATH [NAME] | attr del PATH NAME");
    }
    const std::string path = absolute(args[2]);
    if (args[1] == "get" && args.size() <= 4) {
        auto attributes = client_->get_attributes(path, caller_for(path));
        if (!attributes.ok()) {
            return attributes.status();
        }
        if (args.size() == 4) {
            auto it = attributes->custom.find(core::canonical_attribute_name(args[3]));
            if (it == attributes->custom.end()) {
                return core::make_error(StatusCode::not_found, "no attribute " + args[3] + " on " + path);
            }
            print(it->second);
        } else {
            for (const auto& [name, value] : attributes->custom) {
                print(name + "=" + value);
            }
        }
        return {};
    }
    std::vector<core::AttributeUpdate> updates;
    if (args[1] == "set" && args.size() == 5) {
        updates.push_back({args[3], args[4]});
    } else if (args[1] == "del" && args.size() == 4) {
        updates.push_back({args[3], std::nullopt});
    } else {
        return usage("attr set PATH NAME VALUE | attr get PATH [NAME] | attr del PATH NAME");
    }
    auto result = client_->update_attributes(path, caller_for(path), updates);
    return result.ok() ? Status() : result.status();
}

Status Shell::cmd_zipget(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() != 3) {
        return usage("zipget REMOTE LOCAL.zip");
    }
    const std::string remote = absolute(args[1]);
    auto zip = client_->get_directory_zip_in_chunks(remote, caller_for(remote));
    if (!zip.ok()) {
        return zip.status();
    }
    if (auto status = write_local(args[2], zip->archive); !status.ok()) {
        return status;
    }
    print(remote + " -> " + args[2] + " (" + std::to_string(zip->archive.size()) + " bytes, " +
          std::to_string(zip->omitted) + " entries omitted)");
    return {};
}

Status Shell::cmd_zipput(const Args& raw)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    Args args = raw;
    auto mode = take_mode(args);
    if (!mode.ok()) {
        return mode.status();
    }
    if (args.size() != 3) {
        return usage("zipput [-m OCTAL] LOCAL.zip REMOTE");
    }
    const std::string remote = absolute(args[2]);
    auto archive = read_local(args[1]);
    if (!archive.ok()) {
        return archive.status();
    }
    auto create = creation(*mode, kDefaultDirectoryPermissions);
    if (!create.ok()) {
        return create.status();
    }
    const core::Ownership caller = caller_for(parent_of(remote));
    const bool chunked = archive->size() > options_.chunk_threshold;
    auto created = chunked ? client_->create_directory_unzip_in_chunks(remote, *archive, caller, *create)
                           : client_->create_directory_unzip(remote, std::move(*archive), caller, *create);
    if (!created.ok()) {
        return created.status();
    }
    if (auto status = cache_->remember(site_, remote, create->owner); !status.ok()) {
        return status;
    }
    print(args[1] + " -> " + remote + " (" + std::to_string(*created) + " entries)");
    return {};
}

Status Shell::cmd_watch(const Args& args)
{
    if (args.size() == 2 && args[1] == "stop") {
        stop_watch();
        return {};
    }
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    if (args.size() > 3) {
        return usage("watch [PATH [GLOB]] | watch stop");
    }
    stop_watch();
    const std::string prefix = absolute(args.size() >= 2 ? args[1] : ".");
    auto stream = client_->subscribe(prefix, args.size() == 3 ? args[2] : "");
    if (!stream.ok()) {
        return stream.status();
    }
    watch_stream_ = std::move(*stream);
    print("watching " + prefix + (args.size() == 3 ? " " + args[2] : ""));
    watch_thread_ = std::thread([this, stream = watch_stream_.get()] {
        try {
            v1::ChangeEvent event;
            while (stream->next(event)) {
                std::string line = "event #" + std::to_string(event.sequence()) + " " +
                                   std::string(change_kind_name(event.kind())) + " " + event.path();
                if (!event.new_path().empty()) {
                    line += " -> " + event.new_path();
                }
                print(line);
            }
            if (!stream->status().ok()) {
                std::lock_guard lock(print_mutex_);
                err_ << "watch: " << stream->status().to_string() << '\n' << std::flush;
            }
        } catch (const rpc::TransportError&) {
            // Cancelled, or the connection went away.
        }
    });
    return {};
}

Status Shell::cmd_find(const Args& args)
{
    if (auto status = require_session(); !status.ok()) {
        return status;
    }
    v1::SearchQuery query;
    std::string prefix = cwd_;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        const bool has_value = i + 1 < args.size();
        if (arg == "--name" && has_value) {
            query.set_name_glob(args[++i]);
        } else if (arg == "--content" && has_value) {
            query.set_content(args[++i]);
        } else if (arg == "--attr" && has_value) {
            const std::string& spec = args[++i];
            auto* predicate = query.add_attributes();
            const auto eq = spec.find('=');
            predicate->set_name(spec.substr(0, eq));
            if (eq != std::string::npos) {
                predicate->set_value(spec.substr(eq + 1));
            }
        } else if (arg == "--max" && has_value) {
            try {
                query.set_max_results(static_cast<std::uint32_t>(std::stoul(args[++i])));
            } catch (const std::exception&) {
                return usage("find ... --max N");
            }
        } else if (i == 1 && !arg.starts_with("--")) {
            prefix = arg;
        } else {
            return usage("find [PATH] [--name GLOB] [--content TEXT] [--attr NAME[=VALUE]]... [--max N]");
        }
    }
    query.set_path_prefix(absolute(prefix));
    auto results = client_->search(query, caller_for(query.path_prefix()));
    if (!results.ok()) {
        return results.status();
    }
    for (const auto& hit : results->hits) {
        print(hit.path + (hit.attributes.kind == core::NodeKind::directory ? "/" : ""));
    }
    if (results->truncated) {
        print("(results truncated)");
    }
    return {};
}

Status Shell::cmd_handles(const Args& args)
{
    if (args.size() >= 3 && args[1] == "export") {
        bool mask_user = false;
        bool mask_host = false;
        std::string filter;
        for (std::size_t i = 3; i < args.size(); ++i) {
            if (args[i] == "--mask-user") {
                mask_user = true;
            } else if (args[i] == "--mask-host") {
                mask_host = true;
            } else if (args[i] == "--filter" && i + 1 < args.size()) {
                filter = args[++i];
            } else {
                return usage("handles export FILE [--mask-user] [--mask-host] [--filter GLOB]");
            }
        }
        auto document = cache_->export_handles(filter, mask_user, mask_host);
        if (!document.ok()) {
            return document.status();
        }
        return write_local(args[2], *document);
    }
    if (args.size() == 3 && args[1] == "import") {
        auto document = read_local(args[2]);
        if (!document.ok()) {
            return document.status();
        }
        auto merged = cache_->import_handles(*document);
        if (!merged.ok()) {
            return merged.status();
        }
        print(std::to_string(*merged) + " handles merged");
        return {};
    }
    return usage("handles export FILE [--mask-user] [--mask-host] [--filter GLOB] | handles import FILE");
}

Status Shell::cmd_sleep(const Args& args)
{
    if (args.size() != 2) {
        return usage("sleep MS");
    }
    try {
        std::this_thread::sleep_for(std::chrono::milliseconds(std::stoul(args[1])));
    } catch (const std::exception&) {
        return usage("sleep MS");
    }
    return {};
}

}  // namespace mikfs::client
