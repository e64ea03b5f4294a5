#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "mikfs/server/snapshot.hpp"
#include "test_pki.hpp"

using namespace mikfs;
using core::Path;

namespace {

core::Ownership random_owner(std::mt19937& rng)
{
    std::string host(rng() % 3 == 0 ? 0 : 16, '\0');
    std::string user(rng() % 4 == 0 ? 0 : 1 + rng() % 64, '\0');
    for (char& c : host) {
        c = static_cast<char>(rng());
    }
    for (char& c : user) {
        c = static_cast<char>(rng());
    }
    return {*core::GroupOwner::from_bytes(host), *core::GroupOwner::from_bytes(user)};
}

core::Tree random_tree(unsigned seed)
{
    std::mt19937 rng(seed);
    core::Tree tree(random_owner(rng), core::PermissionsMask(0x1FFD), 123);
    std::vector<Path> dirs{Path()};
    for (int i = 0; i < 200; ++i) {
        const Path parent = dirs[rng() % dirs.size()];
        const Path path = parent.child("n" + std::to_string(i) + (i % 7 == 0 ? " spaced \xC3\xA9" : ""));
        const core::PermissionsMask mask(rng() & 0x1FFF);
        if (rng() % 4 == 0) {
            if (tree.create_directory(path, random_owner(rng), mask, rng()).ok()) {
                dirs.push_back(path);
            }
        } else {
            std::string content(rng() % 3000, '\0');
            for (char& c : content) {
                c = static_cast<char>(rng());
            }
            EXPECT_TRUE(tree.create_file(path, content, random_owner(rng), mask, rng()).ok());
        }
        if (rng() % 5 == 0) {
            core::AttributeUpdate update{"k" + std::to_string(rng() % 4), std::string(rng() % 40, 'v')};
            EXPECT_TRUE(tree.update_attributes(path, std::span(&update, 1)).ok());
        }
    }
    return tree;
}

// Structural comparison including owner keys, which no public view exposes.
void expect_same(const core::Node& a, const core::Node& b, const std::string& where)
{
    ASSERT_EQ(a.kind(), b.kind()) << where;
    EXPECT_EQ(a.attrs.owner, b.attrs.owner) << where;
    EXPECT_EQ(a.attrs.permissions, b.attrs.permissions) << where;
    EXPECT_EQ(a.attrs.last_modified_time, b.attrs.last_modified_time) << where;
    EXPECT_EQ(a.attrs.size, b.attrs.size) << where;
    EXPECT_EQ(a.attrs.custom, b.attrs.custom) << where;
    if (a.is_file()) {
        EXPECT_EQ(a.content(), b.content()) << where;
        return;
    }
    ASSERT_EQ(a.children().size(), b.children().size()) << where;
    for (auto ia = a.children().begin(), ib = b.children().begin(); ia != a.children().end(); ++ia, ++ib) {
        ASSERT_EQ(ia->first, ib->first) << where;
        expect_same(*ia->second, *ib->second, where + "/" + ia->first);
    }
}

}  // namespace

TEST(Snapshot, RoundTripIsIdentity)
{
    for (unsigned seed : {1u, 2u, 3u}) {
        const core::Tree tree = random_tree(seed);
        const std::string bytes = server::encode_snapshot(tree);
        auto decoded = server::decode_snapshot(bytes);
        ASSERT_TRUE(decoded.ok()) << decoded.status().to_string();
        expect_same(tree.root(), decoded->root(), "");
        EXPECT_EQ(server::encode_snapshot(*decoded), bytes);
    }
}

TEST(Snapshot, EmptyTree)
{
    const core::Tree tree(core::Ownership{}, core::PermissionsMask(core::kDefaultRootPermissions), 0);
    auto decoded = server::decode_snapshot(server::encode_snapshot(tree));
    ASSERT_TRUE(decoded.ok());
    EXPECT_EQ(decoded->node_count(), 1u);
    expect_same(tree.root(), decoded->root(), "");
}

TEST(Snapshot, EveryTruncationIsRejected)
{
    core::Tree tree(core::Ownership{}, core::PermissionsMask(0x0FFD), 5);
    ASSERT_TRUE(tree.create_file(*Path::parse("/f"), "abc", core::Ownership{}, core::PermissionsMask(0x0800), 6).ok());
    const std::string bytes = server::encode_snapshot(tree);
    for (std::size_t length = 0; length < bytes.size(); ++length) {
        EXPECT_FALSE(server::decode_snapshot(bytes.substr(0, length)).ok()) << length;
    }
    EXPECT_FALSE(server::decode_snapshot(bytes + "x").ok());
}

TEST(Snapshot, BitFlipsAreRejected)
{
    const std::string bytes = server::encode_snapshot(random_tree(9));
    std::mt19937 rng(77);
    for (int i = 0; i < 200; ++i) {
        std::string damaged = bytes;
        damaged[rng() % damaged.size()] ^= static_cast<char>(1 << (rng() % 8));
        EXPECT_FALSE(server::decode_snapshot(damaged).ok());
    }
}

TEST(Snapshot, FileWriteIsAtomicReplace)
{
    const auto dir = mikfs::testing::scratch_dir("snapshot");
    const auto path = dir / "tree.snap";
    const core::Tree first = random_tree(4);
    ASSERT_TRUE(server::write_snapshot_file(path, server::encode_snapshot(first)).ok());
    const core::Tree second = random_tree(5);
    ASSERT_TRUE(server::write_snapshot_file(path, server::encode_snapshot(second)).ok());
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    auto loaded = server::load_snapshot_file(path);
    ASSERT_TRUE(loaded.ok());
    expect_same(second.root(), loaded->root(), "");

    // A failed write leaves the previous file in place.
    EXPECT_FALSE(server::write_snapshot_file(dir / "missing" / "x.snap", "data").ok());
    std::filesystem::remove_all(dir);
}
