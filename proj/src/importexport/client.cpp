#include "mikfs/importexport/client.hpp"

#include "importexport.pb.h"
#include "mikfs/wire/convert.hpp"
#include "mikfs/wire/methods.hpp"

namespace mikfs::importexport {

using core::Status;
namespace pb = ::mikfs::importexport::v1;
namespace m = wire::ie_method;

namespace {

void to_proto(pb::Site& out, const Site& site)
{
    out.set_site_id(site.id);
    out.set_display_name(site.display_name);
}

void to_proto(pb::PathRecord& out, const PathRecord& record)
{
    out.set_site_id(record.site);
    out.set_path(record.path);
    *out.mutable_ownership() = wire::to_proto(record.ownership);
    out.set_updated_at(record.updated_at);
}

core::Result<PathRecord> from_proto(const pb::PathRecord& in)
{
    auto ownership = wire::from_proto(in.ownership());
    if (!ownership.ok()) {
        return ownership.status();
    }
    return PathRecord{in.site_id(), in.path(), *ownership, in.updated_at()};
}

core::Result<std::vector<PathRecord>> records_of(const pb::PathsResponse& response)
{
    if (auto status = wire::from_proto(response.status()); !status.ok()) {
        return status;
    }
    std::vector<PathRecord> out;
    for (const auto& in : response.records()) {
        auto record = from_proto(in);
        if (!record.ok()) {
            return record.status();
        }
        out.push_back(std::move(*record));
    }
    return out;
}

}  // namespace

bool SiteStream::next(Event& event)
{
    pb::SiteEvent in;
    if (!call_->read(in)) {
        return false;
    }
    status_ = wire::from_proto(in.status());
    if (!status_.ok()) {
        return false;
    }
    switch (in.kind()) {
    case pb::SiteEvent::KIND_SNAPSHOT: event.kind = Kind::snapshot; break;
    case pb::SiteEvent::KIND_ADDED: event.kind = Kind::added; break;
    case pb::SiteEvent::KIND_REMOVED: event.kind = Kind::removed; break;
    default:
        status_ = core::make_error(core::StatusCode::invalid_argument, "unknown site event kind");
        return false;
    }
    event.sites.clear();
    for (const auto& site : in.sites()) {
        event.sites.push_back({site.site_id(), site.display_name()});
    }
    event.sequence = in.sequence();
    return true;
}

core::Result<std::unique_ptr<ImportExportClient>> ImportExportClient::connect(const std::string& host,
                                                                             std::uint16_t port,
                                                                             const rpc::TlsClientConfig& tls)
{
    auto context = rpc::TlsContext::client(tls);
    if (!context.ok()) {
        return context.status();
    }
    return std::make_unique<ImportExportClient>(rpc::Channel::create(*context, host, port));
}

template <class Response>
Response ImportExportClient::call(std::uint32_t method, const google::protobuf::MessageLite& request)
{
    return rpc::unary_call<Response>(*channel_, wire::kImportExportService, method, request);
}

Status ImportExportClient::add_site(const Site& site)
{
    pb::AddSiteRequest request;
    to_proto(*request.mutable_site(), site);
    return wire::from_proto(call<pb::StatusResponse>(m::add_site, request).status());
}

Status ImportExportClient::add_sites(const std::vector<Site>& sites)
{
    pb::AddSitesRequest request;
    for (const Site& site : sites) {
        to_proto(*request.add_sites(), site);
    }
    return wire::from_proto(call<pb::StatusResponse>(m::add_sites, request).status());
}

Status ImportExportClient::add_path(const PathRecord& record)
{
    pb::AddPathRequest request;
    to_proto(*request.mutable_record(), record);
    return wire::from_proto(call<pb::StatusResponse>(m::add_path, request).status());
}

Status ImportExportClient::add_paths(const std::vector<PathRecord>& records)
{
    pb::AddPathsRequest request;
    for (const PathRecord& record : records) {
        to_proto(*request.add_records(), record);
    }
    return wire::from_proto(call<pb::StatusResponse>(m::add_paths, request).status());
}

core::Result<std::vector<Site>> ImportExportClient::sites()
{
    const auto response = call<pb::GetSitesResponse>(m::get_sites, pb::GetSitesRequest());
    if (auto status = wire::from_proto(response.status()); !status.ok()) {
        return status;
    }
    std::vector<Site> out;
    for (const auto& site : response.sites()) {
        out.push_back({site.site_id(), site.display_name()});
    }
    return out;
}

core::Result<PathRecord> ImportExportClient::get_path(const std::string& site, const std::string& path)
{
    pb::GetPathRequest request;
    request.set_site_id(site);
    request.set_path(path);
    const auto response = call<pb::GetPathResponse>(m::get_path, request);
    if (auto status = wire::from_proto(response.status()); !status.ok()) {
        return status;
    }
    return from_proto(response.record());
}

core::Result<std::vector<PathRecord>> ImportExportClient::paths_for_site(const std::string& site)
{
    pb::GetPathsForSiteRequest request;
    request.set_site_id(site);
    return records_of(call<pb::PathsResponse>(m::get_paths_for_site, request));
}

core::Result<std::vector<PathRecord>> ImportExportClient::all_paths()
{
    return records_of(call<pb::PathsResponse>(m::get_paths_for_all_sites, pb::GetPathsForAllSitesRequest()));
}

Status ImportExportClient::remove_site(const std::string& site)
{
    pb::RemoveSiteRequest request;
    request.set_site_id(site);
    return wire::from_proto(call<pb::StatusResponse>(m::remove_site, request).status());
}

Status ImportExportClient::remove_sites(const std::vector<std::string>& sites)
{
    pb::RemoveSitesRequest request;
    for (const auto& site : sites) {
        request.add_site_ids(site);
    }
    return wire::from_proto(call<pb::StatusResponse>(m::remove_sites, request).status());
}

Status ImportExportClient::remove_all_sites()
{
    return wire::from_proto(call<pb::StatusResponse>(m::remove_all_sites, pb::RemoveAllSitesRequest()).status());
}

Status ImportExportClient::remove_path(const std::string& site, const std::string& path)
{
    pb::RemovePathRequest request;
    request.mutable_key()->set_site_id(site);
    request.mutable_key()->set_path(path);
    return wire::from_proto(call<pb::StatusResponse>(m::remove_path, request).status());
}

Status ImportExportClient::remove_paths(const std::vector<PathKey>& keys)
{
    pb::RemovePathsRequest request;
    for (const PathKey& key : keys) {
        auto* out = request.add_keys();
        out->set_site_id(key.site);
        out->set_path(key.path);
    }
    return wire::from_proto(call<pb::StatusResponse>(m::remove_paths, request).status());
}

core::Result<std::unique_ptr<SiteStream>> ImportExportClient::subscribe()
{
    auto rpc_call = channel_->start(wire::kImportExportService, m::sites_subscribe);
    rpc_call->write(pb::SitesSubscribeRequest());
    rpc_call->half_close();
    return std::make_unique<SiteStream>(std::move(rpc_call));
}

core::Result<std::string> ImportExportClient::export_handles(const std::string& filter_glob, bool mask_user,
                                                             bool mask_host)
{
    pb::ExportHandlesRequest request;
    request.set_filter_glob(filter_glob);
    request.set_mask_user(mask_user);
    request.set_mask_host(mask_host);
    auto response = call<pb::ExportHandlesResponse>(m::export_handles, request);
    if (auto status = wire::from_proto(response.status()); !status.ok()) {
        return status;
    }
    return std::move(*response.mutable_document());
}

core::Result<std::uint32_t> ImportExportClient::import_handles(const std::string& document)
{
    pb::ImportHandlesRequest request;
    request.set_document(document);
    const auto response = call<pb::ImportHandlesResponse>(m::import_handles, request);
    if (auto status = wire::from_proto(response.status()); !status.ok()) {
        return status;
    }
    return response.merged();
}

}  // namespace mikfs::importexport
