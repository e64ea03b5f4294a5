#include <gtest/gtest.h>

#include <random>

#include "mikfs/core/authorize.hpp"
#include "mikfs/server/search.hpp"

using namespace mikfs;
using core::Path;
using core::PermissionsMask;

namespace {

const core::Ownership kOwner{*core::GroupOwner::from_bytes("host"), *core::GroupOwner::from_bytes("alice")};
const core::Ownership kOther{*core::GroupOwner::from_bytes("elsewhere"), *core::GroupOwner::from_bytes("bob")};

Path p(const char* raw) { return *Path::parse(raw); }

core::Tree fixture()
{
    core::Tree tree(kOwner, PermissionsMask(0x0FFF), 1);
    const PermissionsMask open(0x0FFF);
    EXPECT_TRUE(tree.create_directory(p("/docs"), kOwner, open, 1).ok());
    EXPECT_TRUE(tree.create_file(p("/docs/a.txt"), "hay needle hay", kOwner, open, 1).ok());
    EXPECT_TRUE(tree.create_file(p("/docs/b.md"), "no match", kOwner, open, 1).ok());
    EXPECT_TRUE(tree.create_file(p("/docs/secret.txt"), "needle", kOwner, PermissionsMask(0x0800), 1).ok());
    EXPECT_TRUE(tree.create_file(p("/c.txt"), std::string("ne\0edle", 7), kOwner, open, 1).ok());
    core::AttributeUpdate tag{"Colour", "red"};
    EXPECT_TRUE(tree.update_attributes(p("/docs/b.md"), std::span(&tag, 1)).ok());
    return tree;
}

std::vector<std::string> paths(const server::SearchOutcome& outcome)
{
    std::vector<std::string> out;
    for (const auto& hit : outcome.hits) {
        out.push_back(hit.path.str());
    }
    return out;
}

server::SearchQuery query(const std::string& prefix, const std::string& glob, const std::string& content,
                          std::vector<server::AttributePredicate> attributes = {}, std::uint32_t max = 0)
{
    auto q = server::make_query(prefix, glob, content, std::move(attributes), max);
    EXPECT_TRUE(q.ok()) << q.status().to_string();
    return *q;
}

}  // namespace

TEST(Search, GlobOnFinalName)
{
    const core::Tree tree = fixture();
    EXPECT_EQ(paths(server::search(tree, kOwner, query("", "*.txt", ""))),
              (std::vector<std::string>{"/c.txt", "/docs/a.txt", "/docs/secret.txt"}));
    EXPECT_EQ(paths(server::search(tree, kOwner, query("/docs", "*.md", ""))), std::vector<std::string>{"/docs/b.md"});
}

TEST(Search, ContentIsRawBytes)
{
    const core::Tree tree = fixture();
    EXPECT_EQ(paths(server::search(tree, kOwner, query("", "", "needle"))),
              (std::vector<std::string>{"/docs/a.txt", "/docs/secret.txt"}));
    EXPECT_EQ(paths(server::search(tree, kOwner, query("", "", std::string("e\0e", 3)))),
              std::vector<std::string>{"/c.txt"});
}

TEST(Search, UnreadableFilesNeverSurface)
{
    const core::Tree tree = fixture();
    const auto hits = server::search(tree, kOther, query("", "", "needle"));
    EXPECT_EQ(paths(hits), std::vector<std::string>{"/docs/a.txt"});
    for (const auto& hit : hits.hits) {
        EXPECT_TRUE(core::authorize(tree, kOther, hit.path, core::Action::read_file).ok());
    }
}

TEST(Search, AttributePredicates)
{
    const core::Tree tree = fixture();
    EXPECT_EQ(paths(server::search(tree, kOwner, query("", "", "", {{"COLOUR", std::nullopt}}))),
              std::vector<std::string>{"/docs/b.md"});
    EXPECT_EQ(paths(server::search(tree, kOwner, query("", "", "", {{"colour", "red"}}))),
              std::vector<std::string>{"/docs/b.md"});
    EXPECT_TRUE(server::search(tree, kOwner, query("", "", "", {{"colour", "blue"}})).hits.empty());
}

TEST(Search, PrefixAloneListsSubtreeSorted)
{
    const core::Tree tree = fixture();
    EXPECT_EQ(paths(server::search(tree, kOwner, query("/docs", "", ""))),
              (std::vector<std::string>{"/docs", "/docs/a.txt", "/docs/b.md", "/docs/secret.txt"}));
}

TEST(Search, EmptyQueryAndBadGlobAreRejected)
{
    EXPECT_EQ(server::make_query("", "", "", {}, 0).code(), core::StatusCode::invalid_argument);
    EXPECT_EQ(server::make_query("", "[a", "", {}, 0).code(), core::StatusCode::invalid_argument);
    EXPECT_EQ(server::make_query("", "", "", {{"", std::nullopt}}, 0).code(), core::StatusCode::invalid_argument);
}

TEST(Search, Truncation)
{
    const core::Tree tree = fixture();
    const auto outcome = server::search(tree, kOwner, query("", "*", "", {}, 2));
    EXPECT_TRUE(outcome.truncated);
    EXPECT_EQ(paths(outcome), (std::vector<std::string>{"/c.txt", "/docs"}));
    EXPECT_EQ(query("", "*", "").max_results, server::kDefaultMaxResults);
}

TEST(Search, RandomTreesAgainstBruteForce)
{
    std::mt19937 rng(4242);
    const char* names[] = {"a.txt", "b.md", "c", "d.txt", "needle"};
    for (int round = 0; round < 20; ++round) {
        core::Tree tree(kOwner, PermissionsMask(0x0FFF), 1);
        std::vector<Path> dirs{Path()};
        std::vector<Path> all;
        for (int i = 0; i < 40; ++i) {
            const Path parent = dirs[rng() % dirs.size()];
            const Path path = parent.child(std::string(names[rng() % 5]) + std::to_string(rng() % 3));
            const PermissionsMask mask(rng() & 0x0FFF);
            if (rng() % 3 == 0) {
                if (tree.create_directory(path, kOwner, mask, 1).ok()) {
                    dirs.push_back(path);
                    all.push_back(path);
                }
            } else if (tree.create_file(path, rng() % 2 ? "xx needle" : "plain", kOwner, mask, 1).ok()) {
                all.push_back(path);
            }
        }
        const auto q = query("", "*.txt*", "needle");
        std::vector<std::string> expected;
        for (const Path& path : all) {
            const core::Node* node = tree.lookup(path);
            const std::string name(path.name());
            if (node->is_file() && name.find(".txt") != std::string::npos &&
                node->content().find("needle") != std::string::npos &&
                core::authorize(tree, kOther, path, core::Action::read_file).ok()) {
                expected.push_back(path.str());
            }
        }
        std::sort(expected.begin(), expected.end());
        EXPECT_EQ(paths(server::search(tree, kOther, q)), expected) << "round " << round;
    }
}
