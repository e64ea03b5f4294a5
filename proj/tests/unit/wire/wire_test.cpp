#include <gtest/gtest.h>

#include <google/protobuf/descriptor.h>

#include "importexport.pb.h"
#include "mikfs.pb.h"
#include "mikfs/wire/convert.hpp"
#include "mikfs/wire/methods.hpp"

using namespace mikfs;
using google::protobuf::DescriptorPool;

namespace {

void expect_table_matches_idl(std::string_view service_name, std::span<const wire::MethodInfo> table)
{
    // Touch both generated files so the linker keeps their descriptors.
    (void)v1::Status::descriptor();
    (void)importexport::v1::Site::descriptor();
    const auto* service = DescriptorPool::generated_pool()->FindServiceByName(std::string(service_name));
    ASSERT_NE(service, nullptr) << service_name;
    ASSERT_EQ(static_cast<std::size_t>(service->method_count()), table.size());
    for (int i = 0; i < service->method_count(); ++i) {
        const auto* method = service->method(i);
        const auto& row = table[static_cast<std::size_t>(i)];
        EXPECT_EQ(row.number, static_cast<std::uint32_t>(i));
        EXPECT_EQ(method->name(), row.name);
        wire::Pattern expected = wire::Pattern::unary;
        if (method->client_streaming() && method->server_streaming()) {
            expected = wire::Pattern::bidi_streaming;
        } else if (method->client_streaming()) {
            expected = wire::Pattern::client_streaming;
        } else if (method->server_streaming()) {
            expected = wire::Pattern::server_streaming;
        }
        EXPECT_EQ(row.pattern, expected) << row.name;
    }
}

}  // namespace

TEST(MethodTable, MatchesIdlDescriptors)
{
    expect_table_matches_idl(wire::kMikfsService, wire::mikfs_methods());
    expect_table_matches_idl(wire::kImportExportService, wire::importexport_methods());
}

TEST(MethodTable, PublishedNumberingAndPatterns)
{
    const auto methods = wire::mikfs_methods();
    ASSERT_EQ(methods.size(), 27u);
    EXPECT_EQ(methods[0].name, "GetApiInfo");
    EXPECT_EQ(methods[1].pattern, wire::Pattern::bidi_streaming);
    EXPECT_EQ(methods[7].pattern, wire::Pattern::client_streaming);
    EXPECT_EQ(methods[10].name, "MoveFile");
    EXPECT_EQ(methods[10].pattern, wire::Pattern::unary);
    EXPECT_EQ(methods[26].name, "SearchSubscribe");
    for (std::uint32_t n : {5u, 17u, 24u, 26u}) {
        EXPECT_EQ(methods[n].pattern, wire::Pattern::server_streaming) << n;
    }
    for (std::uint32_t n : {7u, 19u}) {
        EXPECT_EQ(methods[n].pattern, wire::Pattern::client_streaming) << n;
    }
    const auto ie = wire::importexport_methods();
    EXPECT_EQ(ie[13].name, "SitesSubscribe");
    EXPECT_EQ(ie[13].pattern, wire::Pattern::server_streaming);
}

TEST(StatusCodes, StableNumbering)
{
    const auto* codes = DescriptorPool::generated_pool()->FindEnumTypeByName("mikfs.v1.StatusCode");
    ASSERT_NE(codes, nullptr);
    for (int n = 0; n <= 16; ++n) {
        const auto* value = codes->FindValueByNumber(n);
        ASSERT_NE(value, nullptr) << n;
        EXPECT_EQ(core::status_code_name(static_cast<core::StatusCode>(n)).empty(), false);
    }
    EXPECT_EQ(v1::STATUS_CYCLE_REJECTED, static_cast<int>(core::StatusCode::cycle_rejected));
    EXPECT_EQ(v1::STATUS_NOT_A_FILE, 13);
}

TEST(Messages, AdversarialRoundTrip)
{
    v1::PutFileRequest request;
    request.set_session_token(std::string(32, '\0'));
    request.set_path("/" + std::string(255, 'n'));
    request.mutable_owner()->mutable_host_group()->set_key("");
    request.mutable_owner()->mutable_user_group()->set_key(std::string(64, '\xff'));
    std::string content;
    for (int i = 0; i < 4096; ++i) {
        content.push_back(static_cast<char>(i * 37));  // not UTF-8
    }
    request.set_content(content);
    request.set_permissions(0x1FFF);

    v1::PutFileRequest decoded;
    ASSERT_TRUE(decoded.ParseFromString(request.SerializeAsString()));
    EXPECT_EQ(decoded.content(), content);
    EXPECT_EQ(decoded.owner().user_group().key(), std::string(64, '\xff'));
    EXPECT_EQ(decoded.path(), request.path());
    EXPECT_EQ(decoded.SerializeAsString(), request.SerializeAsString());
}

TEST(Messages, UnknownFieldsAreTolerated)
{
    // A newer peer's request with fields this message does not define.
    v1::GetFileRequest newer;
    newer.set_session_token("tok");
    newer.set_path("/x");
    newer.mutable_caller()->mutable_user_group()->set_key("u");

    v1::LogoutRequest older;
    ASSERT_TRUE(older.ParseFromString(newer.SerializeAsString()));
    EXPECT_EQ(older.session_token(), "tok");
    v1::GetFileRequest again;
    ASSERT_TRUE(again.ParseFromString(older.SerializeAsString()));
    EXPECT_EQ(again.path(), "/x");
}

TEST(Convert, StatusAndOwnership)
{
    const core::Status status = core::make_error(core::StatusCode::directory_not_empty, "d");
    const core::Status back = wire::from_proto(wire::to_proto(status));
    EXPECT_EQ(back.code(), status.code());
    EXPECT_EQ(back.message(), "d");
    EXPECT_TRUE(wire::from_proto(wire::to_proto(core::Status())).ok());

    v1::Ownership too_long;
    too_long.mutable_host_group()->set_key(std::string(65, 'k'));
    EXPECT_EQ(wire::from_proto(too_long).code(), core::StatusCode::invalid_argument);
}

TEST(Convert, AttributesCarryNoOwner)
{
    const auto* fields = v1::NodeAttributes::descriptor();
    for (int i = 0; i < fields->field_count(); ++i) {
        EXPECT_EQ(fields->field(i)->message_type() == v1::Ownership::descriptor(), false);
        EXPECT_EQ(fields->field(i)->message_type() == v1::GroupOwner::descriptor(), false);
    }
    core::PublicAttributes attributes;
    attributes.size = 5;
    attributes.permissions = core::PermissionsMask(0x1F60);
    attributes.custom["k"] = "v";
    v1::NodeAttributes out;
    wire::fill(out, attributes);
    const auto back = wire::from_proto(v1::NODE_KIND_FILE, out);
    EXPECT_EQ(back, attributes);
}
