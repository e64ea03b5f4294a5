#include <gtest/gtest.h>

#include "mikfs/core/attributes.hpp"

using namespace mikfs::core;

TEST(Attributes, NamesAreCanonicalizedToLowerCase)
{
    std::vector<AttributeUpdate> updates{{"Author", "bob"}};
    auto result = apply_attribute_updates({}, updates);
    ASSERT_TRUE(result.ok());
    EXPECT_EQ(result->size(), 1u);
    EXPECT_EQ(result->at("author"), "bob");

    std::vector<AttributeUpdate> again{{"AUTHOR", "alice"}};
    result = apply_attribute_updates(*result, again);
    ASSERT_TRUE(result.ok());
    EXPECT_EQ(result->size(), 1u);
    EXPECT_EQ(result->at("author"), "alice");
}

TEST(Attributes, AbsentValueRemoves)
{
    std::vector<AttributeUpdate> updates{{"tag", "x"}, {"Tag", std::nullopt}};
    auto result = apply_attribute_updates({}, updates);
    ASSERT_TRUE(result.ok());
    EXPECT_TRUE(result->empty());
}

TEST(Attributes, ValueLengthBoundary)
{
    std::vector<AttributeUpdate> ok{{"v", std::string(65535, 'x')}};
    EXPECT_TRUE(apply_attribute_updates({}, ok).ok());
    std::vector<AttributeUpdate> too_long{{"v", std::string(65536, 'x')}};
    EXPECT_EQ(apply_attribute_updates({}, too_long).code(), StatusCode::invalid_argument);
    std::vector<AttributeUpdate> empty_value{{"v", std::string()}};
    EXPECT_TRUE(apply_attribute_updates({}, empty_value).ok());
}

TEST(Attributes, NameLengthBoundary)
{
    EXPECT_TRUE(validate_attribute_name("n").ok());
    EXPECT_TRUE(validate_attribute_name(std::string(255, 'n')).ok());
    EXPECT_EQ(validate_attribute_name(std::string(256, 'n')).code(), StatusCode::invalid_argument);
    EXPECT_EQ(validate_attribute_name("").code(), StatusCode::invalid_argument);
}

TEST(Attributes, BatchIsAllOrNothing)
{
    CustomAttributes start{{"keep", "1"}};
    std::vector<AttributeUpdate> updates{{"new", "2"}, {"", "bad"}};
    auto result = apply_attribute_updates(start, updates);
    EXPECT_EQ(result.code(), StatusCode::invalid_argument);
    EXPECT_EQ(start.size(), 1u);
}

TEST(Attributes, NonAsciiNamesKeepTheirCase)
{
    EXPECT_EQ(canonical_attribute_name("\xC3\x89tat-MIXED"), "\xC3\x89tat-mixed");
}
