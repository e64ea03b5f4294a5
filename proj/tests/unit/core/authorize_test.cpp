#include <gtest/gtest.h>

#include <array>
#include <random>

#include "mikfs/core/authorize.hpp"

using namespace mikfs::core;

namespace {

Path P(std::string_view raw)
{
    return *Path::parse(raw);
}

Ownership own(std::string_view host, std::string_view user)
{
    return Ownership{*GroupOwner::from_bytes(host), *GroupOwner::from_bytes(user)};
}

// Independent model of the rights check: the membership table and the bit
// layout are restated here rather than reused from the library.
bool model_match(const std::string& a, const std::string& b)
{
    return a.empty() || b.empty() || a == b;
}

int model_class(const Ownership& caller, const NodeAttributes& node)
{
    const bool host = model_match(caller.host_group.key(), node.owner.host_group.key());
    const bool user = model_match(caller.user_group.key(), node.owner.user_group.key());
    if (host && user) return 0;
    if (user) return 1;
    if (host) return 2;
    return 3;
}

bool model_bit(const Ownership& caller, const NodeAttributes& node, int right)  // 0 r, 1 w, 2 x
{
    const int shift = (3 - model_class(caller, node)) * 3 + (2 - right);
    return (node.permissions.bits() >> shift) & 1u;
}

bool model_allows(const Node& node, const std::vector<std::string>& segments, std::size_t index,
                  const Ownership& caller, Action action, const std::string& child)
{
    if (index < segments.size()) {
        if (!node.is_directory() || !model_bit(caller, node.attrs, 2)) {
            return false;
        }
        const Node* next = node.child(segments[index]);
        return next != nullptr && model_allows(*next, segments, index + 1, caller, action, child);
    }
    const bool r = model_bit(caller, node.attrs, 0);
    const bool w = model_bit(caller, node.attrs, 1);
    const bool x = model_bit(caller, node.attrs, 2);
    switch (action) {
    // Kind mismatches are reported by the tree operation, not here.
    case Action::read_file: return r;
    case Action::write_file: return w;
    case Action::list: return r;
    case Action::traverse: return true;
    case Action::set_permissions:
    case Action::set_attributes: return model_class(caller, node.attrs) == 0;
    case Action::create_child: return node.is_directory() && w && x;
    case Action::delete_child: {
        if (!node.is_directory() || !w || !x) {
            return false;
        }
        const Node* target = node.child(child);
        if (target == nullptr) {
            return false;
        }
        if ((node.attrs.permissions.bits() & 0x1000u) == 0) {
            return true;
        }
        return model_class(caller, node.attrs) == 0 || model_class(caller, target->attrs) == 0;
    }
    }
    return false;
}

}  // namespace

TEST(Authorize, StickyDirectoryProtectsOthersFiles)
{
    const auto alice = own("h", "alice");
    const auto bob = own("h", "bob");
    Tree tree(own("h", "root"), PermissionsMask(0x0FFF), 1);
    ASSERT_TRUE(tree.create_directory(P("/shared"), own("h", "root"), PermissionsMask(0x1FFF), 1).ok());
    ASSERT_TRUE(tree.create_file(P("/shared/a.txt"), "x", alice, PermissionsMask(0x0FFF), 1).ok());

    const Status denied = authorize(tree, bob, P("/shared"), Action::delete_child, "a.txt");
    EXPECT_EQ(denied.code(), StatusCode::permission_denied);
    EXPECT_NE(denied.message().find("sticky"), std::string::npos);
    EXPECT_TRUE(authorize(tree, alice, P("/shared"), Action::delete_child, "a.txt").ok());
    EXPECT_TRUE(authorize(tree, own("h", "root"), P("/shared"), Action::delete_child, "a.txt").ok());
}

TEST(Authorize, OwnerWriteUnderRestrictiveMask)
{
    const auto owner = own("h", "u");
    Tree tree(owner, PermissionsMask(0x0FFF), 1);
    ASSERT_TRUE(tree.create_file(P("/f"), "x", owner, PermissionsMask(0xD20), 1).ok());
    EXPECT_TRUE(authorize(tree, owner, P("/f"), Action::write_file).ok());
    EXPECT_EQ(authorize(tree, own("other-h", "u"), P("/f"), Action::write_file).code(),
              StatusCode::permission_denied);
}

TEST(Authorize, MissingTraverseOnAncestorDenies)
{
    const auto owner = own("h", "u");
    const auto stranger = own("x", "y");
    Tree tree(owner, PermissionsMask(0x0FFF), 1);
    ASSERT_TRUE(tree.create_directory(P("/locked"), owner, PermissionsMask(0x0FFE), 1).ok());
    ASSERT_TRUE(tree.create_file(P("/locked/f"), "x", owner, PermissionsMask(0x0FFF), 1).ok());
    const Status status = authorize(tree, stranger, P("/locked/f"), Action::read_file);
    EXPECT_EQ(status.code(), StatusCode::permission_denied);
    EXPECT_NE(status.message().find("traverse"), std::string::npos);
    EXPECT_TRUE(authorize(tree, owner, P("/locked/f"), Action::read_file).ok());
}

TEST(Authorize, WalkErrors)
{
    const auto owner = own("h", "u");
    Tree tree(owner, PermissionsMask(0x0FFF), 1);
    ASSERT_TRUE(tree.create_file(P("/f"), "x", owner, PermissionsMask(0x0FFF), 1).ok());
    EXPECT_EQ(authorize(tree, owner, P("/missing/g"), Action::read_file).code(), StatusCode::not_found);
    EXPECT_EQ(authorize(tree, owner, P("/f/g"), Action::read_file).code(), StatusCode::not_a_directory);
}

TEST(Authorize, AgreesWithRecursiveModel)
{
    std::mt19937_64 rng(7);
    const std::array<Ownership, 5> owners = {own("h1", "u1"), own("h1", "u2"), own("h2", "u1"), own("h2", "u2"),
                                             own("", "u1")};
    const std::array<std::string, 3> names = {"a", "b", "c"};
    const std::array<Action, 8> actions = {Action::read_file,    Action::write_file,      Action::create_child,
                                           Action::delete_child, Action::list,            Action::traverse,
                                           Action::set_permissions, Action::set_attributes};
    auto mask = [&] { return PermissionsMask(static_cast<std::uint32_t>(rng() & 0x1FFF)); };

    int compared = 0;
    for (int round = 0; round < 40; ++round) {
        Tree tree(owners[rng() % 4], mask(), 1);
        for (int i = 0; i < 30; ++i) {
            std::string raw;
            const int depth = 1 + static_cast<int>(rng() % 3);
            for (int d = 0; d < depth; ++d) {
                raw += "/" + names[rng() % names.size()];
            }
            const auto& owner = owners[rng() % 4];
            if (rng() % 3 == 0) {
                (void)tree.create_file(P(raw), "x", owner, mask(), 1);
            } else {
                (void)tree.create_directory(P(raw), owner, mask(), 1);
            }
        }
        for (int q = 0; q < 250; ++q) {
            std::string raw;
            const int depth = static_cast<int>(rng() % 4);
            std::vector<std::string> segments;
            for (int d = 0; d < depth; ++d) {
                segments.push_back(names[rng() % names.size()]);
                raw += "/" + segments.back();
            }
            const auto& caller = owners[rng() % owners.size()];
            const Action action = actions[rng() % actions.size()];
            const std::string child = names[rng() % names.size()];
            const bool expected = model_allows(tree.root(), segments, 0, caller, action, child);
            const Status actual = authorize(tree, caller, P(raw), action, child);
            EXPECT_EQ(actual.ok(), expected) << raw << " " << action_name(action) << " " << actual.to_string();
            ++compared;
        }
    }
    EXPECT_EQ(compared, 10000);
}
