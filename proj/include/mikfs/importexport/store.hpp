#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mikfs/core/ownership.hpp"
#include "mikfs/core/status.hpp"

namespace mikfs::importexport {

inline constexpr std::uint16_t kDefaultPort = 9961;

struct Site {
    std::string id;  // "host:port", host lower-cased
    std::string display_name;

    friend bool operator==(const Site&, const Site&) = default;
};

struct PathRecord {
    std::string site;
    std::string path;  // canonical rendering
    core::Ownership ownership;
    std::uint64_t updated_at = 0;

    friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

struct PathKey {
    std::string site;
    std::string path;
};

// "Host:9959" -> "host:9959". InvalidArgument without a 1-65535 port or
// with an empty host.
core::Result<std::string> canonical_site_id(std::string_view raw);

struct SiteDelta {
    enum class Kind { added, removed } kind;
    Site site;
};

// Ownership handles keyed by (site, path). Not synchronized. Every mutating
// call is all-or-nothing and appends the site additions and removals it
// made to `deltas` when given.
class Store {
public:
    core::Status add_site(Site site, std::vector<SiteDelta>* deltas = nullptr);
    core::Status add_sites(std::vector<Site> sites, std::vector<SiteDelta>* deltas = nullptr);
    // The site must exist. Replaces any record at the same key.
    core::Status add_path(PathRecord record);
    core::Status add_paths(std::vector<PathRecord> records);

    std::vector<Site> sites() const;
    core::Result<PathRecord> get_path(std::string_view site, std::string_view path) const;
    core::Result<std::vector<PathRecord>> paths_for_site(std::string_view site) const;
    std::vector<PathRecord> all_paths() const;

    core::Status remove_site(std::string_view site, std::vector<SiteDelta>* deltas = nullptr);
    core::Status remove_sites(const std::vector<std::string>& sites, std::vector<SiteDelta>* deltas = nullptr);
    void remove_all_sites(std::vector<SiteDelta>* deltas = nullptr);
    core::Status remove_path(std::string_view site, std::string_view path);
    core::Status remove_paths(const std::vector<PathKey>& keys);

    // JSON export document. filter_glob matches the full path; empty means
    // everything. Masked key parts are written as "".
    core::Result<std::string> export_document(std::string_view filter_glob, bool mask_user, bool mask_host,
                                              std::uint64_t now) const;
    // Merges by (site, path), newer updated_at wins, ties go to the
    // incoming record. Unknown sites are created. Returns the number of
    // records taken from the document.
    core::Result<std::uint32_t> import_document(std::string_view document, std::vector<SiteDelta>* deltas = nullptr);

    // Full state for persistence, as JSON.
    std::string serialize() const;
    static core::Result<Store> deserialize(std::string_view text);

private:
    struct SiteEntry {
        std::string display_name;
        std::map<std::string, PathRecord, std::less<>> paths;
    };

    core::Status validate_record(PathRecord& record, bool site_must_exist) const;

    std::map<std::string, SiteEntry, std::less<>> sites_;
};

}  // namespace mikfs::importexport
