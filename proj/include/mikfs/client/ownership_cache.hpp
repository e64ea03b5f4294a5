#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "mikfs/core/ownership.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/importexport/client.hpp"
#include "mikfs/importexport/store.hpp"

namespace mikfs::client {

// Client-side record of the Ownership handles this user allocated, keyed
// by (site, path). Lookups try the ImportExport service first and then the
// local file; writes go to both. Once the service fails at the transport
// level it is dropped for the rest of the process, with one warning.
//
// The local file is JSON:
//   {"version": 1, "sites": [{"id", "display_name"}],
//    "records": [{"site", "path", "host_key_hex", "user_key_hex", "updated_at"}],
//    "user_keys": {"<site>": "<hex>"}}
class OwnershipCache {
public:
    // An unreadable or malformed file is an error; a missing one is empty.
    static core::Result<std::unique_ptr<OwnershipCache>> open(
        std::filesystem::path file, std::unique_ptr<importexport::ImportExportClient> service = nullptr,
        std::ostream* warnings = nullptr);

    // Exact path match only; a miss is the wildcard {[], []}.
    core::Ownership resolve(const std::string& site, const std::string& path);

    core::Status remember(const std::string& site, const std::string& path, const core::Ownership& ownership);
    // Drops the record at path, and with subtree every record below it.
    core::Status forget(const std::string& site, const std::string& path, bool subtree);
    // Re-keys the record at `from` and everything below it to `to`.
    core::Status rename(const std::string& site, const std::string& from, const std::string& to);

    // This user's key for a site: created once (16 random bytes), then reused.
    core::Result<core::GroupOwner> user_key(const std::string& site);

    core::Result<std::string> export_handles(const std::string& filter_glob, bool mask_user, bool mask_host);
    core::Result<std::uint32_t> import_handles(const std::string& document);

    bool service_available() const { return service_ != nullptr; }

private:
    OwnershipCache() = default;

    core::Status save();
    void drop_service(const std::string& reason);
    core::Status ensure_site(const std::string& site);
    std::vector<importexport::PathRecord> records_under(const std::string& site, const std::string& path,
                                                        bool subtree);

    std::filesystem::path file_;
    importexport::Store local_;
    std::map<std::string, std::string> user_keys_;
    std::unique_ptr<importexport::ImportExportClient> service_;
    std::ostream* warnings_ = nullptr;
};

// $MIKFS_CACHE, else $XDG_CONFIG_HOME/mikfs/handles.json, else
// ~/.config/mikfs/handles.json.
std::filesystem::path default_cache_path();

}  // namespace mikfs::client
