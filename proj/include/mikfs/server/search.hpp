#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mikfs/core/glob.hpp"
#include "mikfs/core/ownership.hpp"
#include "mikfs/core/path.hpp"
#include "mikfs/core/status.hpp"
#include "mikfs/core/tree.hpp"

namespace mikfs::server {

inline constexpr std::uint32_t kDefaultMaxResults = 1000;

struct AttributePredicate {
    std::string name;                  // canonical (lower-case)
    std::optional<std::string> value;  // nullopt: the attribute only has to exist
};

struct SearchQuery {
    std::optional<core::Path> prefix;
    std::optional<core::Glob> name_glob;
    std::optional<std::string> content;  // raw byte substring, files only
    std::vector<AttributePredicate> attributes;
    std::uint32_t max_results = kDefaultMaxResults;

    bool empty() const { return !prefix && !name_glob && !content && attributes.empty(); }
};

// Builds a query from raw request fields. InvalidArgument for an empty
// query, a bad prefix or glob, or a bad attribute name.
core::Result<SearchQuery> make_query(const std::string& prefix, const std::string& name_glob,
                                     const std::string& content, std::vector<AttributePredicate> attributes,
                                     std::uint32_t max_results);

struct SearchHit {
    core::Path path;
    core::PublicAttributes attributes;
};

struct SearchOutcome {
    std::vector<SearchHit> hits;  // ordered by rendered path, byte-wise
    bool truncated = false;
};

// Whether the node at path matches every criterion and the caller may see
// it (read for files, list for directories).
bool search_matches(const core::Tree& tree, const core::Ownership& caller, const SearchQuery& query,
                    const core::Path& path, const core::Node& node);

// Full scan of the tree. The root itself is never a result.
SearchOutcome search(const core::Tree& tree, const core::Ownership& caller, const SearchQuery& query);

}  // namespace mikfs::server
