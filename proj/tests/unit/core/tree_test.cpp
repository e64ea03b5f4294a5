#include <gtest/gtest.h>

#include <random>

#include "mikfs/core/tree.hpp"

using namespace mikfs::core;

namespace {

Path P(std::string_view raw)
{
    return *Path::parse(raw);
}

const Ownership kOwner{*GroupOwner::from_bytes("host"), *GroupOwner::from_bytes("user")};
const PermissionsMask kMask(0x0FFD);

Tree fresh()
{
    return Tree(kOwner, kMask, 1);
}

std::string random_bytes(std::mt19937_64& rng, std::size_t n)
{
    std::string out(n, '\0');
    for (auto& c : out) {
        c = static_cast<char>(rng() & 0xFF);
    }
    return out;
}

}  // namespace

TEST(Tree, FreshRootListsEmpty)
{
    Tree tree = fresh();
    auto entries = tree.list(Path());
    ASSERT_TRUE(entries.ok());
    EXPECT_TRUE(entries->empty());
    EXPECT_EQ(tree.node_count(), 1u);
}

TEST(Tree, CreateNeedsExistingParent)
{
    Tree tree = fresh();
    EXPECT_EQ(tree.create_file(P("/a/b.txt"), "x", kOwner, kMask, 2).code(), StatusCode::not_found);
    EXPECT_EQ(tree.lookup(P("/a")), nullptr);
}

TEST(Tree, CreateConflictsAndKinds)
{
    Tree tree = fresh();
    ASSERT_TRUE(tree.create_directory(P("/d"), kOwner, kMask, 2).ok());
    ASSERT_TRUE(tree.create_file(P("/d/f"), "hello", kOwner, kMask, 3).ok());
    EXPECT_EQ(tree.create_file(P("/d/f"), "again", kOwner, kMask, 4).code(), StatusCode::already_exists);
    EXPECT_EQ(tree.create_directory(P("/d"), kOwner, kMask, 4).code(), StatusCode::already_exists);
    EXPECT_EQ(tree.create_file(P("/d/f/g"), "", kOwner, kMask, 4).code(), StatusCode::not_a_directory);
    EXPECT_EQ(tree.list(P("/d/f")).code(), StatusCode::not_a_directory);
    EXPECT_EQ(tree.remove(P("/d/f"), NodeKind::directory, false).code(), StatusCode::not_a_directory);
    EXPECT_EQ(tree.remove(P("/d"), NodeKind::file, false).code(), StatusCode::not_a_file);
}

TEST(Tree, ContentRoundTripsByteForByte)
{
    std::mt19937_64 rng(42);
    Tree tree = fresh();
    for (std::size_t size : {0u, 1u, 255u, 65536u, 100001u}) {
        const std::string content = random_bytes(rng, size);
        const Path path = P("/f" + std::to_string(size));
        ASSERT_TRUE(tree.create_file(path, content, kOwner, kMask, 5).ok());
        const Node* node = tree.lookup(path);
        ASSERT_NE(node, nullptr);
        EXPECT_EQ(node->content(), content);
        EXPECT_EQ(node->attrs.size, size);
    }
}

TEST(Tree, OverwriteKeepsMetadata)
{
    Tree tree = fresh();
    ASSERT_TRUE(tree.create_file(P("/f"), "one", kOwner, PermissionsMask(0x0C00), 5).ok());
    std::vector<AttributeUpdate> updates{{"tag", "v"}};
    ASSERT_TRUE(tree.update_attributes(P("/f"), updates).ok());
    ASSERT_TRUE(tree.overwrite_file(P("/f"), "three", 9).ok());
    const Node* node = tree.lookup(P("/f"));
    EXPECT_EQ(node->content(), "three");
    EXPECT_EQ(node->attrs.size, 5u);
    EXPECT_EQ(node->attrs.last_modified_time, 9u);
    EXPECT_EQ(node->attrs.permissions, PermissionsMask(0x0C00));
    EXPECT_EQ(node->attrs.custom.at("tag"), "v");
}

TEST(Tree, MoveIntoOwnSubtreeIsRejected)
{
    Tree tree = fresh();
    ASSERT_TRUE(tree.create_directory(P("/d"), kOwner, kMask, 2).ok());
    EXPECT_EQ(tree.move(P("/d"), P("/d/e"), NodeKind::directory).code(), StatusCode::cycle_rejected);
    EXPECT_EQ(tree.move(P("/d"), P("/d"), NodeKind::directory).code(), StatusCode::already_exists);
    EXPECT_NE(tree.lookup(P("/d")), nullptr);
}

TEST(Tree, MovePreservesSubtreeAttributes)
{
    Tree tree = fresh();
    const Ownership other{*GroupOwner::from_bytes("h2"), *GroupOwner::from_bytes("u2")};
    ASSERT_TRUE(tree.create_directory(P("/a"), other, PermissionsMask(0x0F00), 7).ok());
    ASSERT_TRUE(tree.create_file(P("/a/x"), "data", other, PermissionsMask(0x0800), 8).ok());
    ASSERT_TRUE(tree.move(P("/a"), P("/b"), NodeKind::directory).ok());
    EXPECT_EQ(tree.lookup(P("/a")), nullptr);
    const Node* moved = tree.lookup(P("/b/x"));
    ASSERT_NE(moved, nullptr);
    EXPECT_EQ(moved->attrs.owner, other);
    EXPECT_EQ(moved->attrs.last_modified_time, 8u);
    EXPECT_EQ(moved->content(), "data");
}

TEST(Tree, CopyRestampsEveryNode)
{
    Tree tree = fresh();
    ASSERT_TRUE(tree.create_directory(P("/a"), kOwner, kMask, 2).ok());
    ASSERT_TRUE(tree.create_file(P("/a/x"), "data", kOwner, kMask, 3).ok());
    std::vector<AttributeUpdate> updates{{"k", "v"}};
    ASSERT_TRUE(tree.update_attributes(P("/a/x"), updates).ok());
    const Ownership copier{*GroupOwner::from_bytes("host"), *GroupOwner::from_bytes("copier")};
    ASSERT_TRUE(tree.copy(P("/a"), P("/c"), NodeKind::directory, copier, PermissionsMask(0x0F80), 50).ok());
    for (const char* raw : {"/c", "/c/x"}) {
        const Node* node = tree.lookup(P(raw));
        ASSERT_NE(node, nullptr) << raw;
        EXPECT_EQ(node->attrs.owner, copier);
        EXPECT_EQ(node->attrs.permissions, PermissionsMask(0x0F80));
        EXPECT_EQ(node->attrs.last_modified_time, 50u);
    }
    EXPECT_EQ(tree.lookup(P("/c/x"))->content(), "data");
    EXPECT_EQ(tree.lookup(P("/c/x"))->attrs.custom.at("k"), "v");
    EXPECT_EQ(tree.lookup(P("/a/x"))->attrs.owner, kOwner);
}

TEST(Tree, RemoveRules)
{
    Tree tree = fresh();
    ASSERT_TRUE(tree.create_directory(P("/d"), kOwner, kMask, 2).ok());
    ASSERT_TRUE(tree.create_file(P("/d/f"), "", kOwner, kMask, 2).ok());
    EXPECT_EQ(tree.remove(P("/d"), NodeKind::directory, false).code(), StatusCode::directory_not_empty);
    EXPECT_EQ(tree.remove(Path(), NodeKind::directory, true).code(), StatusCode::permission_denied);
    EXPECT_EQ(tree.remove(P("/nope"), NodeKind::file, false).code(), StatusCode::not_found);
    EXPECT_TRUE(tree.remove(P("/d"), NodeKind::directory, true).ok());
    EXPECT_EQ(tree.node_count(), 1u);
}

TEST(Tree, MoveRespectsPathLengthLimit)
{
    Tree tree = fresh();
    // /a.../b... reaches 4095 with 15 segments of 255 plus one of 254.
    std::string prefix;
    for (int i = 0; i < 15; ++i) {
        prefix += "/" + std::string(255, static_cast<char>('a' + i));
        ASSERT_TRUE(tree.create_directory(P(prefix), kOwner, kMask, 2).ok());
    }
    ASSERT_TRUE(tree.create_file(P(prefix + "/" + std::string(254, 'z')), "", kOwner, kMask, 2).ok());
    // Moving the top directory under /x adds two characters to every path.
    const std::string top = "/" + std::string(255, 'a');
    ASSERT_TRUE(tree.create_directory(P("/x"), kOwner, kMask, 2).ok());
    EXPECT_EQ(tree.move(P(top), P("/x/" + std::string(255, 'q')), NodeKind::directory).code(),
              StatusCode::invalid_path);
    EXPECT_TRUE(tree.move(P(top), P("/" + std::string(253, 'q')), NodeKind::directory).ok());
    EXPECT_TRUE(check_invariants(tree.root()).ok());
    ASSERT_TRUE(tree.move(P("/" + std::string(253, 'q')), P(top), NodeKind::directory).ok());
    EXPECT_NE(tree.lookup(P(top)), nullptr);
}

TEST(Tree, RandomOperationsPreserveInvariants)
{
    std::mt19937_64 rng(0xC0FFEE);
    Tree tree = fresh();
    const std::vector<std::string> names = {"a", "b", "c", "d"};
    auto random_path = [&](int max_depth) {
        std::string raw;
        const int depth = 1 + static_cast<int>(rng() % max_depth);
        for (int i = 0; i < depth; ++i) {
            raw += "/" + names[rng() % names.size()];
        }
        return P(raw);
    };
    for (int step = 0; step < 5000; ++step) {
        const Path a = random_path(4);
        const Path b = random_path(4);
        const auto kind = rng() % 2 ? NodeKind::file : NodeKind::directory;
        const std::size_t before = tree.node_count();
        Status status;
        switch (rng() % 7) {
        case 0: status = tree.create_directory(a, kOwner, kMask, step); break;
        case 1: status = tree.create_file(a, random_bytes(rng, rng() % 64), kOwner, kMask, step); break;
        case 2: status = tree.overwrite_file(a, random_bytes(rng, rng() % 64), step); break;
        case 3: status = tree.remove(a, kind, rng() % 2); break;
        case 4: status = tree.move(a, b, kind); break;
        case 5: status = tree.copy(a, b, kind, kOwner, kMask, step); break;
        default: status = tree.set_permissions(a, PermissionsMask(rng() & 0x1FFF)); break;
        }
        if (!status.ok()) {
            EXPECT_EQ(tree.node_count(), before) << status.to_string();
        }
        ASSERT_TRUE(check_invariants(tree.root()).ok()) << "step " << step;
    }
}
