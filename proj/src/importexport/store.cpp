#include "mikfs/importexport/store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <json.hpp>

#include "mikfs/auth/crypto.hpp"
#include "mikfs/core/glob.hpp"
#include "mikfs/core/path.hpp"

namespace mikfs::importexport {

using core::Status;
using core::StatusCode;
using nlohmann::json;

namespace {

Status unknown_site(std::string_view site)
{
    return core::make_error(StatusCode::not_found, "no site " + std::string(site));
}

json record_json(const PathRecord& record, bool mask_user, bool mask_host)
{
    return json{{"site", record.site},
                {"path", record.path},
                {"host_key_hex", mask_host ? std::string() : auth::to_hex(record.ownership.host_group.key())},
                {"user_key_hex", mask_user ? std::string() : auth::to_hex(record.ownership.user_group.key())},
                {"updated_at", record.updated_at}};
}

core::Result<core::GroupOwner> key_from_hex(const json& value)
{
    if (!value.is_string()) {
        return core::make_error(StatusCode::invalid_argument, "key must be a hex string");
    }
    auto bytes = auth::from_hex(value.get<std::string>());
    if (!bytes) {
        return core::make_error(StatusCode::invalid_argument, "key is not valid hex");
    }
    return core::GroupOwner::from_bytes(*bytes);
}

core::Result<PathRecord> record_from_json(const json& value)
{
    if (!value.is_object() || !value.contains("site") || !value.contains("path") || !value["site"].is_string() ||
        !value["path"].is_string()) {
        return core::make_error(StatusCode::invalid_argument, "record needs string site and path");
    }
    PathRecord record;
    record.site = value["site"].get<std::string>();
    record.path = value["path"].get<std::string>();
    auto host = key_from_hex(value.value("host_key_hex", json("")));
    if (!host.ok()) {
        return host.status();
    }
    auto user = key_from_hex(value.value("user_key_hex", json("")));
    if (!user.ok()) {
        return user.status();
    }
    record.ownership = {*host, *user};
    const json updated = value.value("updated_at", json(0));
    if (!updated.is_number_unsigned() && !(updated.is_number_integer() && updated.get<std::int64_t>() >= 0)) {
        return core::make_error(StatusCode::invalid_argument, "updated_at must be a non-negative integer");
    }
    record.updated_at = updated.get<std::uint64_t>();
    return record;
}

}  // namespace

core::Result<std::string> canonical_site_id(std::string_view raw)
{
    const std::size_t colon = raw.rfind(':');
    if (colon == std::string_view::npos || colon == 0) {
        return core::make_error(StatusCode::invalid_argument, "site id must be host:port, got '" + std::string(raw) + "'");
    }
    const std::string_view port_text = raw.substr(colon + 1);
    unsigned port = 0;
    auto [end, error] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (port_text.empty() || error != std::errc() || end != port_text.data() + port_text.size() || port == 0 ||
        port > 65535) {
        return core::make_error(StatusCode::invalid_argument, "bad port in site id '" + std::string(raw) + "'");
    }
    std::string host(raw.substr(0, colon));
    for (char& c : host) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return host + ":" + std::to_string(port);
}

Status Store::add_site(Site site, std::vector<SiteDelta>* deltas)
{
    return add_sites({std::move(site)}, deltas);
}

Status Store::add_sites(std::vector<Site> sites, std::vector<SiteDelta>* deltas)
{
    std::set<std::string> seen;
    for (Site& site : sites) {
        auto id = canonical_site_id(site.id);
        if (!id.ok()) {
            return id.status();
        }
        site.id = *id;
        if (sites_.contains(site.id) || !seen.insert(site.id).second) {
            return core::make_error(StatusCode::already_exists, "site " + site.id + " already exists");
        }
    }
    for (Site& site : sites) {
        sites_[site.id].display_name = site.display_name;
        if (deltas != nullptr) {
            deltas->push_back({SiteDelta::Kind::added, site});
        }
    }
    return {};
}

Status Store::validate_record(PathRecord& record, bool site_must_exist) const
{
    auto id = canonical_site_id(record.site);
    if (!id.ok()) {
        return id.status();
    }
    record.site = *id;
    if (site_must_exist && !sites_.contains(record.site)) {
        return unknown_site(record.site);
    }
    auto path = core::Path::parse(record.path);
    if (!path.ok()) {
        return path.status();
    }
    record.path = path->str();
    return {};
}

Status Store::add_path(PathRecord record)
{
    return add_paths({std::move(record)});
}

Status Store::add_paths(std::vector<PathRecord> records)
{
    for (PathRecord& record : records) {
        if (auto status = validate_record(record, true); !status.ok()) {
            return status;
        }
    }
    for (PathRecord& record : records) {
        auto& paths = sites_.find(record.site)->second.paths;
        std::string key = record.path;
        paths.insert_or_assign(std::move(key), std::move(record));
    }
    return {};
}

std::vector<Site> Store::sites() const
{
    std::vector<Site> out;
    for (const auto& [id, entry] : sites_) {
        out.push_back({id, entry.display_name});
    }
    return out;
}

core::Result<PathRecord> Store::get_path(std::string_view site, std::string_view path) const
{
    auto id = canonical_site_id(site);
    if (!id.ok()) {
        return id.status();
    }
    auto parsed = core::Path::parse(path);
    if (!parsed.ok()) {
        return parsed.status();
    }
    auto it = sites_.find(*id);
    if (it == sites_.end()) {
        return unknown_site(*id);
    }
    auto record = it->second.paths.find(parsed->str());
    if (record == it->second.paths.end()) {
        return core::make_error(StatusCode::not_found, "no handle for " + parsed->str() + " on " + *id);
    }
    return record->second;
}

core::Result<std::vector<PathRecord>> Store::paths_for_site(std::string_view site) const
{
    auto id = canonical_site_id(site);
    if (!id.ok()) {
        return id.status();
    }
    auto it = sites_.find(*id);
    if (it == sites_.end()) {
        return unknown_site(*id);
    }
    std::vector<PathRecord> out;
    for (const auto& [path, record] : it->second.paths) {
        out.push_back(record);
    }
    return out;
}

std::vector<PathRecord> Store::all_paths() const
{
    std::vector<PathRecord> out;
    for (const auto& [id, entry] : sites_) {
        for (const auto& [path, record] : entry.paths) {
            out.push_back(record);
        }
    }
    return out;
}

Status Store::remove_site(std::string_view site, std::vector<SiteDelta>* deltas)
{
    return remove_sites({std::string(site)}, deltas);
}

Status Store::remove_sites(const std::vector<std::string>& sites, std::vector<SiteDelta>* deltas)
{
    std::set<std::string> ids;
    for (const auto& site : sites) {
        auto id = canonical_site_id(site);
        if (!id.ok()) {
            return id.status();
        }
        if (!sites_.contains(*id)) {
            return unknown_site(*id);
        }
        ids.insert(*id);
    }
    for (const auto& id : ids) {
        auto it = sites_.find(id);
        if (deltas != nullptr) {
            deltas->push_back({SiteDelta::Kind::removed, {id, it->second.display_name}});
        }
        sites_.erase(it);
    }
    return {};
}

void Store::remove_all_sites(std::vector<SiteDelta>* deltas)
{
    if (deltas != nullptr) {
        for (const auto& [id, entry] : sites_) {
            deltas->push_back({SiteDelta::Kind::removed, {id, entry.display_name}});
        }
    }
    sites_.clear();
}

Status Store::remove_path(std::string_view site, std::string_view path)
{
    return remove_paths({{std::string(site), std::string(path)}});
}

Status Store::remove_paths(const std::vector<PathKey>& keys)
{
    std::vector<std::pair<std::string, std::string>> resolved;
    for (const auto& key : keys) {
        auto record = get_path(key.site, key.path);
        if (!record.ok()) {
            return record.status();
        }
        resolved.emplace_back(record->site, record->path);
    }
    for (const auto& [site, path] : resolved) {
        sites_.find(site)->second.paths.erase(path);
    }
    return {};
}

core::Result<std::string> Store::export_document(std::string_view filter_glob, bool mask_user, bool mask_host,
                                                 std::uint64_t now) const
{
    std::optional<core::Glob> filter;
    if (!filter_glob.empty()) {
        auto glob = core::Glob::compile(filter_glob);
        if (!glob.ok()) {
            return glob.status();
        }
        filter = std::move(*glob);
    }
    json records = json::array();
    for (const PathRecord& record : all_paths()) {
        if (!filter || filter->matches(record.path)) {
            records.push_back(record_json(record, mask_user, mask_host));
        }
    }
    return json{{"version", 1}, {"exported_at", now}, {"records", std::move(records)}}.dump(2);
}

core::Result<std::uint32_t> Store::import_document(std::string_view document, std::vector<SiteDelta>* deltas)
{
    const json parsed = json::parse(document, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) {
        return core::make_error(StatusCode::invalid_argument, "import document is not a JSON object");
    }
    if (parsed.value("version", json(0)) != json(1) || !parsed.contains("records") || !parsed["records"].is_array()) {
        return core::make_error(StatusCode::invalid_argument, "import document needs version 1 and a records array");
    }
    std::vector<PathRecord> records;
    for (const json& value : parsed["records"]) {
        auto record = record_from_json(value);
        if (!record.ok()) {
            return record.status();
        }
        if (auto status = validate_record(*record, false); !status.ok()) {
            return core::make_error(StatusCode::invalid_argument, "import record: " + status.message());
        }
        records.push_back(std::move(*record));
    }
    std::uint32_t merged = 0;
    for (PathRecord& record : records) {
        auto site = sites_.find(record.site);
        if (site == sites_.end()) {
            site = sites_.emplace(record.site, SiteEntry{}).first;
            if (deltas != nullptr) {
                deltas->push_back({SiteDelta::Kind::added, {record.site, {}}});
            }
        }
        auto& paths = site->second.paths;
        auto existing = paths.find(record.path);
        if (existing != paths.end() && existing->second.updated_at > record.updated_at) {
            continue;
        }
        std::string key = record.path;
        paths.insert_or_assign(std::move(key), std::move(record));
        ++merged;
    }
    return merged;
}

std::string Store::serialize() const
{
    json sites = json::array();
    json records = json::array();
    for (const auto& [id, entry] : sites_) {
        sites.push_back({{"id", id}, {"display_name", entry.display_name}});
        for (const auto& [path, record] : entry.paths) {
            records.push_back(record_json(record, false, false));
        }
    }
    return json{{"version", 1}, {"sites", std::move(sites)}, {"records", std::move(records)}}.dump();
}

core::Result<Store> Store::deserialize(std::string_view text)
{
    const json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || parsed.value("version", json(0)) != json(1) ||
        !parsed.contains("sites") || !parsed["sites"].is_array()) {
        return core::make_error(StatusCode::invalid_argument, "malformed ImportExport state");
    }
    Store store;
    for (const json& site : parsed["sites"]) {
        if (!site.is_object() || !site.contains("id") || !site["id"].is_string()) {
            return core::make_error(StatusCode::invalid_argument, "malformed site entry");
        }
        Site entry{site["id"].get<std::string>(), site.value("display_name", std::string())};
        if (auto status = store.add_site(std::move(entry)); !status.ok()) {
            return status;
        }
    }
    std::vector<PathRecord> records;
    for (const json& value : parsed.value("records", json::array())) {
        auto record = record_from_json(value);
        if (!record.ok()) {
            return record.status();
        }
        records.push_back(std::move(*record));
    }
    if (auto status = store.add_paths(std::move(records)); !status.ok()) {
        return status;
    }
    return store;
}

}  // namespace mikfs::importexport
