#include "mikfs/importexport/service.hpp"

#include <algorithm>

#include "importexport.pb.h"
#include "mikfs/core/tree.hpp"
#include "mikfs/core/file_io.hpp"
#include "mikfs/wire/convert.hpp"
#include "mikfs/wire/methods.hpp"

namespace mikfs::importexport {

using core::Status;
using core::StatusCode;
namespace pb = ::mikfs::importexport::v1;
namespace m = wire::ie_method;

namespace {

constexpr auto kPollInterval = std::chrono::milliseconds(50);

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

core::Result<PathRecord> from_proto(const pb::PathRecord& in, std::uint64_t stamp)
{
    auto ownership = wire::from_proto(in.ownership());
    if (!ownership.ok()) {
        return ownership.status();
    }
    return PathRecord{in.site_id(), in.path(), *ownership, stamp};
}

}  // namespace

std::optional<SiteDelta> SiteSubscription::next(std::chrono::milliseconds wait)
{
    std::unique_lock lock(mutex_);
    ready_.wait_for(lock, wait, [this] { return !queue_.empty(); });
    if (queue_.empty()) {
        return std::nullopt;
    }
    SiteDelta delta = std::move(queue_.front());
    queue_.pop_front();
    return delta;
}

bool SiteSubscription::overflowed()
{
    std::lock_guard lock(mutex_);
    return overflowed_ && queue_.empty();
}

void SiteSubscription::offer(const SiteDelta& delta)
{
    {
        std::lock_guard lock(mutex_);
        if (overflowed_) {
            return;
        }
        if (queue_.size() >= kSiteQueueLimit) {
            overflowed_ = true;
        } else {
            queue_.push_back(delta);
        }
    }
    ready_.notify_one();
}

ImportExportService::ImportExportService(Store store, Clock clock, Persist persist)
    : store_(std::move(store)), clock_(std::move(clock)), persist_(std::move(persist))
{
    if (!clock_) {
        clock_ = [] { return core::now_ns(); };
    }
}

std::uint64_t ImportExportService::stamp()
{
    // Strictly increasing so that newest-wins merges never tie locally.
    last_stamp_ = std::max(last_stamp_ + 1, clock_());
    return last_stamp_;
}

void ImportExportService::publish(const std::vector<SiteDelta>& deltas)
{
    for (const auto& subscriber : subscribers_) {
        for (const SiteDelta& delta : deltas) {
            subscriber->offer(delta);
        }
    }
}

template <class Request, class Response, class Body>
void ImportExportService::mutate(rpc::ServerCall& call, Body&& body)
{
    Request request;
    call.read_single(request);
    Response response;
    Status status;
    {
        std::lock_guard lock(mutex_);
        std::optional<Store> before;
        if (persist_) {
            before = store_;
        }
        std::vector<SiteDelta> deltas;
        status = body(request, response, deltas);
        if (status.ok() && persist_) {
            status = persist_(store_);
            if (!status.ok()) {
                store_ = std::move(*before);
                deltas.clear();
            }
        }
        publish(deltas);
    }
    wire::set_status(response, status);
    call.write(response);
}

template <class Request, class Response, class Body>
void ImportExportService::query(rpc::ServerCall& call, Body&& body)
{
    Request request;
    call.read_single(request);
    Response response;
    Status status;
    {
        std::lock_guard lock(mutex_);
        status = body(request, response);
    }
    wire::set_status(response, status);
    call.write(response);
}

std::string ImportExportService::serialize()
{
    std::lock_guard lock(mutex_);
    return store_.serialize();
}

std::size_t ImportExportService::subscriber_count()
{
    std::lock_guard lock(mutex_);
    return subscribers_.size();
}

rpc::Service ImportExportService::rpc_service()
{
    rpc::Service service{std::string(wire::kImportExportService), {}};
    auto& h = service.handlers;

    h[m::add_site] = [this](rpc::ServerCall& call) {
        mutate<pb::AddSiteRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto& deltas) {
            return store_.add_site({request.site().site_id(), request.site().display_name()}, &deltas);
        });
    };
    h[m::add_sites] = [this](rpc::ServerCall& call) {
        mutate<pb::AddSitesRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto& deltas) {
            std::vector<Site> sites;
            for (const auto& site : request.sites()) {
                sites.push_back({site.site_id(), site.display_name()});
            }
            return store_.add_sites(std::move(sites), &deltas);
        });
    };
    h[m::add_path] = [this](rpc::ServerCall& call) {
        mutate<pb::AddPathRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto&) -> Status {
            auto record = from_proto(request.record(), stamp());
            if (!record.ok()) {
                return record.status();
            }
            return store_.add_path(std::move(*record));
        });
    };
    h[m::add_paths] = [this](rpc::ServerCall& call) {
        mutate<pb::AddPathsRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto&) -> Status {
            std::vector<PathRecord> records;
            const std::uint64_t now = stamp();
            for (const auto& in : request.records()) {
                auto record = from_proto(in, now);
                if (!record.ok()) {
                    return record.status();
                }
                records.push_back(std::move(*record));
            }
            return store_.add_paths(std::move(records));
        });
    };
    h[m::get_sites] = [this](rpc::ServerCall& call) {
        query<pb::GetSitesRequest, pb::GetSitesResponse>(call, [&](const auto&, auto& response) -> Status {
            for (const Site& site : store_.sites()) {
                to_proto(*response.add_sites(), site);
            }
            return {};
        });
    };
    h[m::get_path] = [this](rpc::ServerCall& call) {
        query<pb::GetPathRequest, pb::GetPathResponse>(call, [&](const auto& request, auto& response) -> Status {
            auto record = store_.get_path(request.site_id(), request.path());
            if (!record.ok()) {
                return record.status();
            }
            to_proto(*response.mutable_record(), *record);
            return {};
        });
    };
    h[m::get_paths_for_site] = [this](rpc::ServerCall& call) {
        query<pb::GetPathsForSiteRequest, pb::PathsResponse>(call, [&](const auto& request, auto& response) -> Status {
            auto records = store_.paths_for_site(request.site_id());
            if (!records.ok()) {
                return records.status();
            }
            for (const PathRecord& record : *records) {
                to_proto(*response.add_records(), record);
            }
            return {};
        });
    };
    h[m::get_paths_for_all_sites] = [this](rpc::ServerCall& call) {
        query<pb::GetPathsForAllSitesRequest, pb::PathsResponse>(call, [&](const auto&, auto& response) -> Status {
            for (const PathRecord& record : store_.all_paths()) {
                to_proto(*response.add_records(), record);
            }
            return {};
        });
    };
    h[m::remove_site] = [this](rpc::ServerCall& call) {
        mutate<pb::RemoveSiteRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto& deltas) {
            return store_.remove_site(request.site_id(), &deltas);
        });
    };
    h[m::remove_sites] = [this](rpc::ServerCall& call) {
        mutate<pb::RemoveSitesRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto& deltas) {
            return store_.remove_sites({request.site_ids().begin(), request.site_ids().end()}, &deltas);
        });
    };
    h[m::remove_all_sites] = [this](rpc::ServerCall& call) {
        mutate<pb::RemoveAllSitesRequest, pb::StatusResponse>(call, [&](const auto&, auto&, auto& deltas) -> Status {
            store_.remove_all_sites(&deltas);
            return {};
        });
    };
    h[m::remove_path] = [this](rpc::ServerCall& call) {
        mutate<pb::RemovePathRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto&) {
            return store_.remove_path(request.key().site_id(), request.key().path());
        });
    };
    h[m::remove_paths] = [this](rpc::ServerCall& call) {
        mutate<pb::RemovePathsRequest, pb::StatusResponse>(call, [&](const auto& request, auto&, auto&) {
            std::vector<PathKey> keys;
            for (const auto& key : request.keys()) {
                keys.push_back({key.site_id(), key.path()});
            }
            return store_.remove_paths(keys);
        });
    };
    h[m::sites_subscribe] = [this](rpc::ServerCall& call) { sites_subscribe(call); };
    h[m::export_handles] = [this](rpc::ServerCall& call) {
        query<pb::ExportHandlesRequest, pb::ExportHandlesResponse>(
            call, [&](const auto& request, auto& response) -> Status {
                auto document =
                    store_.export_document(request.filter_glob(), request.mask_user(), request.mask_host(), clock_());
                if (!document.ok()) {
                    return document.status();
                }
                response.set_document(std::move(*document));
                return {};
            });
    };
    h[m::import_handles] = [this](rpc::ServerCall& call) {
        mutate<pb::ImportHandlesRequest, pb::ImportHandlesResponse>(
            call, [&](const auto& request, auto& response, auto& deltas) -> Status {
                auto merged = store_.import_document(request.document(), &deltas);
                if (!merged.ok()) {
                    return merged.status();
                }
                response.set_merged(*merged);
                return {};
            });
    };
    return service;
}

void ImportExportService::sites_subscribe(rpc::ServerCall& call)
{
    pb::SitesSubscribeRequest request;
    call.read_single(request);

    auto subscription = std::make_shared<SiteSubscription>();
    pb::SiteEvent event;
    {
        // Registering under the store lock makes the snapshot and the
        // deltas that follow it gap-free.
        std::lock_guard lock(mutex_);
        subscribers_.push_back(subscription);
        for (const Site& site : store_.sites()) {
            to_proto(*event.add_sites(), site);
        }
    }
    struct Unsubscribe {
        ImportExportService& service;
        std::shared_ptr<SiteSubscription>& subscription;
        ~Unsubscribe()
        {
            std::lock_guard lock(service.mutex_);
            service.subscribers_.remove(subscription);
        }
    } unsubscribe{*this, subscription};

    std::uint64_t sequence = 1;
    wire::set_status(event, {});
    event.set_kind(pb::SiteEvent::KIND_SNAPSHOT);
    event.set_sequence(sequence);
    call.write(event);

    while (!call.cancelled(std::chrono::milliseconds(0))) {
        auto delta = subscription->next(kPollInterval);
        if (!delta) {
            if (subscription->overflowed()) {
                event.Clear();
                wire::set_status(event, core::make_error(StatusCode::subscription_overflow,
                                                         "subscriber fell more than 1024 site events behind"));
                call.write(event);
                return;
            }
            continue;
        }
        event.Clear();
        wire::set_status(event, {});
        event.set_kind(delta->kind == SiteDelta::Kind::added ? pb::SiteEvent::KIND_ADDED
                                                             : pb::SiteEvent::KIND_REMOVED);
        to_proto(*event.add_sites(), delta->site);
        event.set_sequence(++sequence);
        call.write(event);
    }
}

core::Result<std::unique_ptr<ImportExportServer>> ImportExportServer::create(ImportExportConfig config,
                                                                             ImportExportService::Clock clock)
{
    auto tls = rpc::TlsContext::server(config.tls);
    if (!tls.ok()) {
        return tls.status();
    }
    Store store;
    if (!config.state_path.empty() && std::filesystem::exists(config.state_path)) {
        auto text = core::read_file(config.state_path);
        if (!text.ok()) {
            return text.status();
        }
        auto loaded = Store::deserialize(*text);
        if (!loaded.ok()) {
            return core::make_error(loaded.code(), config.state_path.string() + ": " + loaded.status().message());
        }
        store = std::move(*loaded);
    }
    ImportExportService::Persist persist;
    if (!config.state_path.empty()) {
        persist = [path = config.state_path](const Store& current) {
            return core::write_file_atomic(path, current.serialize());
        };
    }

    std::unique_ptr<ImportExportServer> server(new ImportExportServer());
    server->service_ = std::make_unique<ImportExportService>(std::move(store), std::move(clock), std::move(persist));
    server->rpc_ = std::make_unique<rpc::Server>(*tls, rpc::ServerOptions{config.bind_address, config.port});
    server->rpc_->add_service(server->service_->rpc_service());
    return server;
}

ImportExportServer::~ImportExportServer()
{
    stop();
}

core::Status ImportExportServer::start()
{
    if (auto status = rpc_->start(); !status.ok()) {
        return status;
    }
    running_ = true;
    return {};
}

void ImportExportServer::stop()
{
    if (running_) {
        running_ = false;
        rpc_->stop();
    }
}

}  // namespace mikfs::importexport
