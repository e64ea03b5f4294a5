#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mikfs/core/status.hpp"
#include "mikfs/importexport/store.hpp"

namespace mikfs::testing {

// The operations the model drives, so one harness covers the bare Store
// and the service over the wire.
class StoreTarget {
public:
    virtual ~StoreTarget() = default;
    virtual core::Status add_site(const importexport::Site& site) = 0;
    virtual core::Status add_sites(const std::vector<importexport::Site>& sites) = 0;
    virtual core::Status add_path(const importexport::PathRecord& record) = 0;
    virtual core::Status add_paths(const std::vector<importexport::PathRecord>& records) = 0;
    virtual core::Status remove_site(const std::string& site) = 0;
    virtual core::Status remove_sites(const std::vector<std::string>& sites) = 0;
    virtual core::Status remove_all_sites() = 0;
    virtual core::Status remove_path(const std::string& site, const std::string& path) = 0;
    virtual core::Status remove_paths(const std::vector<importexport::PathKey>& keys) = 0;
    virtual core::Result<std::uint32_t> import_handles(const std::string& document) = 0;
    virtual core::Result<std::string> export_handles(const std::string& glob, bool mask_user, bool mask_host) = 0;
    virtual std::vector<importexport::Site> sites() = 0;
    virtual std::vector<importexport::PathRecord> all_paths() = 0;
};

struct ModelReport {
    int operations = 0;
    int checks = 0;
    int exports = 0;
    std::vector<std::string> divergences;  // capped at 20
    int leaks = 0;  // masked exports that contained an original key
};

// Random operations against `target` and an independent map model, with a
// full state comparison after every operation.
ModelReport run_store_model(StoreTarget& target, std::uint32_t seed, int operations);

}  // namespace mikfs::testing
