#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mikfs/core/status.hpp"
#include "mikfs/importexport/store.hpp"
#include "mikfs/rpc/channel.hpp"

namespace mikfs::importexport {

// One SitesSubscribe call. The first event is the full site list.
class SiteStream {
public:
    enum class Kind { snapshot, added, removed };
    struct Event {
        Kind kind;
        std::vector<Site> sites;
        std::uint64_t sequence = 0;
    };

    explicit SiteStream(std::unique_ptr<rpc::ClientCall> call) : call_(std::move(call)) {}

    // False when the stream ended; status() says why.
    bool next(Event& event);
    const core::Status& status() const { return status_; }
    void cancel() { call_->cancel(); }

private:
    std::unique_ptr<rpc::ClientCall> call_;
    core::Status status_;
};

// Typed access to the ImportExport service. Application errors come back
// as Status; transport failures throw rpc::TransportError.
class ImportExportClient {
public:
    explicit ImportExportClient(std::shared_ptr<rpc::Channel> channel) : channel_(std::move(channel)) {}

    static core::Result<std::unique_ptr<ImportExportClient>> connect(const std::string& host, std::uint16_t port,
                                                                     const rpc::TlsClientConfig& tls);

    rpc::Channel& channel() { return *channel_; }

    core::Status add_site(const Site& site);
    core::Status add_sites(const std::vector<Site>& sites);
    // updated_at is ignored; the service stamps it.
    core::Status add_path(const PathRecord& record);
    core::Status add_paths(const std::vector<PathRecord>& records);
    core::Result<std::vector<Site>> sites();
    core::Result<PathRecord> get_path(const std::string& site, const std::string& path);
    core::Result<std::vector<PathRecord>> paths_for_site(const std::string& site);
    core::Result<std::vector<PathRecord>> all_paths();
    core::Status remove_site(const std::string& site);
    core::Status remove_sites(const std::vector<std::string>& sites);
    core::Status remove_all_sites();
    core::Status remove_path(const std::string& site, const std::string& path);
    core::Status remove_paths(const std::vector<PathKey>& keys);
    core::Result<std::unique_ptr<SiteStream>> subscribe();
    core::Result<std::string> export_handles(const std::string& filter_glob, bool mask_user, bool mask_host);
    core::Result<std::uint32_t> import_handles(const std::string& document);

private:
    template <class Response>
    Response call(std::uint32_t method, const google::protobuf::MessageLite& request);

    std::shared_ptr<rpc::Channel> channel_;
};

}  // namespace mikfs::importexport
