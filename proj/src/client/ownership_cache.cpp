#include "mikfs/client/ownership_cache.hpp"

#include <cstdlib>

#include <json.hpp>

#include "mikfs/auth/crypto.hpp"
#include "mikfs/core/file_io.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/tree.hpp"
#include "mikfs/rpc/channel.hpp"

namespace mikfs::client {

using core::Status;
using core::StatusCode;
using importexport::PathKey;
using importexport::PathRecord;
using nlohmann::json;

namespace {

// True when `path` is `root` or lies below it.
bool within(const std::string& root, const std::string& path)
{
    auto a = core::Path::parse(root);
    auto b = core::Path::parse(path);
    return a.ok() && b.ok() && a->is_prefix_of(*b);
}

std::string rebase(const std::string& path, const std::string& from, const std::string& to)
{
    const auto old_root = core::Path::parse(from)->segments();
    auto segments = core::Path::parse(to)->segments();
    const auto& rest = core::Path::parse(path)->segments();
    segments.insert(segments.end(), rest.begin() + static_cast<std::ptrdiff_t>(old_root.size()), rest.end());
    return core::Path::from_segments(std::move(segments)).str();
}

}  // namespace

std::filesystem::path default_cache_path()
{
    if (const char* explicit_path = std::getenv("MIKFS_CACHE"); explicit_path != nullptr && *explicit_path != '\0') {
        return explicit_path;
    }
    if (const char* xdg = std::getenv("XDG_CONFIG_HOME"); xdg != nullptr && *xdg != '\0') {
        return std::filesystem::path(xdg) / "mikfs" / "handles.json";
    }
    const char* home = std::getenv("HOME");
    return std::filesystem::path(home != nullptr ? home : ".") / ".config" / "mikfs" / "handles.json";
}

core::Result<std::unique_ptr<OwnershipCache>> OwnershipCache::open(
    std::filesystem::path file, std::unique_ptr<importexport::ImportExportClient> service, std::ostream* warnings)
{
    std::unique_ptr<OwnershipCache> cache(new OwnershipCache());
    cache->file_ = std::move(file);
    cache->service_ = std::move(service);
    cache->warnings_ = warnings;
    if (!cache->file_.empty() && std::filesystem::exists(cache->file_)) {
        auto text = core::read_file(cache->file_);
        if (!text.ok()) {
            return text.status();
        }
        auto store = importexport::Store::deserialize(*text);
        if (!store.ok()) {
            return core::make_error(store.code(), cache->file_.string() + ": " + store.status().message());
        }
        cache->local_ = std::move(*store);
        const json parsed = json::parse(*text, nullptr, false);
        const json keys = parsed.value("user_keys", json::object());
        for (const auto& [site, hex] : keys.items()) {
            auto bytes = hex.is_string() ? auth::from_hex(hex.get<std::string>()) : std::nullopt;
            if (!bytes || bytes->empty() || bytes->size() > 64) {
                return core::make_error(StatusCode::invalid_argument,
                                        cache->file_.string() + ": bad user key for " + site);
            }
            cache->user_keys_[site] = *bytes;
        }
    }
    return cache;
}

void OwnershipCache::drop_service(const std::string& reason)
{
    service_.reset();
    if (warnings_ != nullptr) {
        *warnings_ << "warning: ImportExport service unavailable (" << reason << "); using the local cache only\n";
    }
}

Status OwnershipCache::save()
{
    if (file_.empty()) {
        return {};
    }
    json doc = json::parse(local_.serialize());
    json keys = json::object();
    for (const auto& [site, key] : user_keys_) {
        keys[site] = auth::to_hex(key);
    }
    doc["user_keys"] = std::move(keys);
    std::error_code error;
    if (file_.has_parent_path()) {
        std::filesystem::create_directories(file_.parent_path(), error);
    }
    return core::write_file_atomic(file_, doc.dump(2));
}

Status OwnershipCache::ensure_site(const std::string& site)
{
    Status status = local_.add_site({site, {}});
    return status.code() == StatusCode::already_exists ? Status() : status;
}

core::Ownership OwnershipCache::resolve(const std::string& site, const std::string& path)
{
    if (service_ != nullptr) {
        try {
            auto record = service_->get_path(site, path);
            if (record.ok()) {
                return record->ownership;
            }
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    auto record = local_.get_path(site, path);
    return record.ok() ? record->ownership : core::Ownership{};
}

Status OwnershipCache::remember(const std::string& site, const std::string& path, const core::Ownership& ownership)
{
    if (auto status = ensure_site(site); !status.ok()) {
        return status;
    }
    const PathRecord record{site, path, ownership, core::now_ns()};
    if (auto status = local_.add_path(record); !status.ok()) {
        return status;
    }
    if (service_ != nullptr) {
        try {
            if (auto status = service_->add_site({site, {}});
                !status.ok() && status.code() != StatusCode::already_exists) {
                return status;
            }
            if (auto status = service_->add_path(record); !status.ok()) {
                return status;
            }
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    return save();
}

std::vector<PathRecord> OwnershipCache::records_under(const std::string& site, const std::string& path,
                                                      bool subtree)
{
    std::vector<PathRecord> out;
    auto records = local_.paths_for_site(site);
    if (records.ok()) {
        for (PathRecord& record : *records) {
            if (subtree ? within(path, record.path) : record.path == path) {
                out.push_back(std::move(record));
            }
        }
    }
    return out;
}

Status OwnershipCache::forget(const std::string& site, const std::string& path, bool subtree)
{
    std::vector<PathKey> keys;
    for (const PathRecord& record : records_under(site, path, subtree)) {
        keys.push_back({record.site, record.path});
    }
    if (auto status = local_.remove_paths(keys); !status.ok()) {
        return status;
    }
    if (service_ != nullptr) {
        try {
            std::vector<PathKey> remote;
            auto records = service_->paths_for_site(site);
            if (records.ok()) {
                for (const PathRecord& record : *records) {
                    if (subtree ? within(path, record.path) : record.path == path) {
                        remote.push_back({record.site, record.path});
                    }
                }
            }
            if (!remote.empty()) {
                (void)service_->remove_paths(remote);
            }
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    return save();
}

Status OwnershipCache::rename(const std::string& site, const std::string& from, const std::string& to)
{
    if (!core::Path::parse(from).ok() || !core::Path::parse(to).ok()) {
        return core::make_error(StatusCode::invalid_path, "cannot rename " + from + " to " + to);
    }
    auto move_records = [&](const std::vector<PathRecord>& records, auto&& remove, auto&& add) -> Status {
        if (records.empty()) {
            return {};
        }
        std::vector<PathKey> keys;
        std::vector<PathRecord> moved;
        for (const PathRecord& record : records) {
            keys.push_back({record.site, record.path});
            PathRecord copy = record;
            copy.path = rebase(record.path, from, to);
            copy.updated_at = core::now_ns();
            moved.push_back(std::move(copy));
        }
        if (auto status = remove(keys); !status.ok()) {
            return status;
        }
        return add(std::move(moved));
    };

    if (auto status = move_records(
            records_under(site, from, true), [&](const auto& keys) { return local_.remove_paths(keys); },
            [&](auto records) { return local_.add_paths(std::move(records)); });
        !status.ok()) {
        return status;
    }
    if (service_ != nullptr) {
        try {
            std::vector<PathRecord> remote;
            auto records = service_->paths_for_site(site);
            if (records.ok()) {
                for (PathRecord& record : *records) {
                    if (within(from, record.path)) {
                        remote.push_back(std::move(record));
                    }
                }
            }
            (void)move_records(
                remote, [&](const auto& keys) { return service_->remove_paths(keys); },
                [&](auto moved) { return service_->add_paths(moved); });
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    return save();
}

core::Result<core::GroupOwner> OwnershipCache::user_key(const std::string& site)
{
    auto it = user_keys_.find(site);
    if (it == user_keys_.end()) {
        it = user_keys_.emplace(site, auth::random_bytes(16)).first;
        if (auto status = save(); !status.ok()) {
            user_keys_.erase(it);
            return status;
        }
    }
    return core::GroupOwner::from_bytes(it->second);
}

core::Result<std::string> OwnershipCache::export_handles(const std::string& filter_glob, bool mask_user,
                                                         bool mask_host)
{
    if (service_ != nullptr) {
        try {
            return service_->export_handles(filter_glob, mask_user, mask_host);
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    return local_.export_document(filter_glob, mask_user, mask_host, core::now_ns());
}

core::Result<std::uint32_t> OwnershipCache::import_handles(const std::string& document)
{
    if (service_ != nullptr) {
        try {
            return service_->import_handles(document);
        } catch (const rpc::TransportError& error) {
            drop_service(error.what());
        }
    }
    auto merged = local_.import_document(document);
    if (!merged.ok()) {
        return merged;
    }
    if (auto status = save(); !status.ok()) {
        return status;
    }
    return merged;
}

}  // namespace mikfs::client
