#include "mikfs/server/search.hpp"

#include <algorithm>

#include "mikfs/core/attributes.hpp"
#include "mikfs/core/authorize.hpp"

namespace mikfs::server {

core::Result<SearchQuery> make_query(const std::string& prefix, const std::string& name_glob,
                                     const std::string& content, std::vector<AttributePredicate> attributes,
                                     std::uint32_t max_results)
{
    SearchQuery query;
    if (!prefix.empty()) {
        auto path = core::Path::parse(prefix);
        if (!path.ok()) {
            return core::make_error(core::StatusCode::invalid_argument, "search prefix: " + path.status().message());
        }
        query.prefix = *path;
    }
    if (!name_glob.empty()) {
        auto glob = core::Glob::compile(name_glob);
        if (!glob.ok()) {
            return glob.status();
        }
        query.name_glob = std::move(*glob);
    }
    if (!content.empty()) {
        query.content = content;
    }
    for (auto& predicate : attributes) {
        if (auto status = core::validate_attribute_name(predicate.name); !status.ok()) {
            return status;
        }
        predicate.name = core::canonical_attribute_name(predicate.name);
    }
    query.attributes = std::move(attributes);
    query.max_results = max_results == 0 ? kDefaultMaxResults : max_results;
    if (query.empty()) {
        return core::make_error(core::StatusCode::invalid_argument, "search query has no criteria");
    }
    return query;
}

bool search_matches(const core::Tree& tree, const core::Ownership& caller, const SearchQuery& query,
                    const core::Path& path, const core::Node& node)
{
    if (path.is_root()) {
        return false;
    }
    if (query.prefix && !query.prefix->is_prefix_of(path)) {
        return false;
    }
    if (query.name_glob && !query.name_glob->matches(path.name())) {
        return false;
    }
    if (query.content && (!node.is_file() || node.content().find(*query.content) == std::string::npos)) {
        return false;
    }
    for (const auto& predicate : query.attributes) {
        auto it = node.attrs.custom.find(predicate.name);
        if (it == node.attrs.custom.end() || (predicate.value && it->second != *predicate.value)) {
            return false;
        }
    }
    const auto action = node.is_file() ? core::Action::read_file : core::Action::list;
    return core::authorize(tree, caller, path, action).ok();
}

namespace {

void walk(const core::Tree& tree, const core::Ownership& caller, const SearchQuery& query, const core::Path& path,
          const core::Node& node, std::vector<SearchHit>& hits)
{
    if (search_matches(tree, caller, query, path, node)) {
        hits.push_back({path, core::public_view(node)});
    }
    if (node.is_directory()) {
        for (const auto& [name, child] : node.children()) {
            walk(tree, caller, query, path.child(name), *child, hits);
        }
    }
}

}  // namespace

SearchOutcome search(const core::Tree& tree, const core::Ownership& caller, const SearchQuery& query)
{
    SearchOutcome outcome;
    core::Path start;
    const core::Node* node = &tree.root();
    if (query.prefix) {
        node = tree.lookup(*query.prefix);
        start = *query.prefix;
    }
    if (node != nullptr) {
        walk(tree, caller, query, start, *node, outcome.hits);
    }
    std::sort(outcome.hits.begin(), outcome.hits.end(),
              [](const SearchHit& a, const SearchHit& b) { return a.path.str() < b.path.str(); });
    if (outcome.hits.size() > query.max_results) {
        outcome.hits.resize(query.max_results);
        outcome.truncated = true;
    }
    return outcome;
}

}  // namespace mikfs::server
