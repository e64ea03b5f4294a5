#include <gtest/gtest.h>

#include "mikfs/core/path.hpp"

using namespace mikfs::core;

namespace {

std::string repeat(std::string_view unit, std::size_t n)
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += unit;
    }
    return out;
}

}  // namespace

TEST(ValidateName, SingleCharacterIsValid)
{
    EXPECT_FALSE(validate_name("a").has_value());
}

TEST(ValidateName, LengthBoundaries)
{
    EXPECT_FALSE(validate_name(repeat("a", 255)).has_value());
    EXPECT_EQ(validate_name(repeat("a", 256)), NameViolation::too_long);
    EXPECT_EQ(validate_name(""), NameViolation::empty);
}

TEST(ValidateName, CountsScalarsNotBytes)
{
    // U+00E9 is two bytes, U+1F600 four; both count as one character.
    EXPECT_FALSE(validate_name(repeat("\xC3\xA9", 255)).has_value());
    EXPECT_EQ(validate_name(repeat("\xC3\xA9", 256)), NameViolation::too_long);
    EXPECT_FALSE(validate_name(repeat("\xF0\x9F\x98\x80", 255)).has_value());
}

TEST(ValidateName, SpacesAndPunctuationAreAllowed)
{
    EXPECT_FALSE(validate_name("my file.txt").has_value());
    EXPECT_FALSE(validate_name("  ~!@#$%^&*()[]{}<>?\\|:;\"' ").has_value());
    EXPECT_FALSE(validate_name(".").has_value());  // rejected only by path parsing
}

TEST(ValidateName, ForbiddenCharacters)
{
    EXPECT_EQ(validate_name("a/b"), NameViolation::slash_character);
    EXPECT_EQ(validate_name(std::string("a\0b", 3)), NameViolation::nul_character);
}

TEST(ValidateName, MalformedUtf8)
{
    EXPECT_EQ(validate_name("\xFF"), NameViolation::invalid_encoding);
    EXPECT_EQ(validate_name("\xC0\xAF"), NameViolation::invalid_encoding);      // overlong '/'
    EXPECT_EQ(validate_name("\xED\xA0\x80"), NameViolation::invalid_encoding);  // surrogate
    EXPECT_EQ(validate_name("\xE2\x82"), NameViolation::invalid_encoding);      // truncated
}

TEST(Utf8, ScalarCount)
{
    EXPECT_EQ(utf8_scalar_count(""), 0u);
    EXPECT_EQ(utf8_scalar_count("abc"), 3u);
    EXPECT_EQ(utf8_scalar_count("\xE6\x97\xA5\xE6\x9C\xAC"), 2u);
    EXPECT_EQ(utf8_scalar_count("\xF4\x90\x80\x80"), std::nullopt);  // above U+10FFFF
}

TEST(ParsePath, AbsoluteAndRelativeSpellings)
{
    auto path = Path::parse("/docs/x.txt");
    ASSERT_TRUE(path.ok());
    EXPECT_EQ(path->segments(), (std::vector<std::string>{"docs", "x.txt"}));
    EXPECT_EQ(path->str(), "/docs/x.txt");

    auto relative = Path::parse("docs/x.txt");
    ASSERT_TRUE(relative.ok());
    EXPECT_EQ(*relative, *path);
}

TEST(ParsePath, RootSpellings)
{
    for (const char* raw : {"", "/"}) {
        auto path = Path::parse(raw);
        ASSERT_TRUE(path.ok()) << raw;
        EXPECT_TRUE(path->is_root());
        EXPECT_EQ(path->str(), "/");
    }
}

TEST(ParsePath, RejectsEmptySegments)
{
    EXPECT_EQ(Path::parse("/a//b").code(), StatusCode::invalid_path);
    EXPECT_EQ(Path::parse("/a/").code(), StatusCode::invalid_path);
    EXPECT_EQ(Path::parse("//").code(), StatusCode::invalid_path);
}

TEST(ParsePath, RejectsRelativeTraversal)
{
    EXPECT_EQ(Path::parse("/a/./b").code(), StatusCode::invalid_path);
    EXPECT_EQ(Path::parse("/a/../b").code(), StatusCode::invalid_path);
    EXPECT_EQ(Path::parse("..").code(), StatusCode::invalid_path);
    EXPECT_TRUE(Path::parse("/a/.../b").ok());
}

TEST(ParsePath, FullPathLengthBoundary)
{
    // 15 segments of 255 plus one of 254: 15*256 + 255 = 4095 characters.
    std::string raw;
    for (int i = 0; i < 15; ++i) {
        raw += "/" + repeat("a", 255);
    }
    const std::string at_limit = raw + "/" + repeat("b", 254);
    auto ok = Path::parse(at_limit);
    ASSERT_TRUE(ok.ok());
    EXPECT_EQ(ok->rendered_length(), 4095u);

    const std::string over = raw + "/" + repeat("b", 255);
    EXPECT_EQ(Path::parse(over).code(), StatusCode::invalid_path);
}

TEST(ParsePath, RejectsInvalidSegment)
{
    EXPECT_EQ(Path::parse(std::string("/a\0b", 4)).code(), StatusCode::invalid_path);
    EXPECT_EQ(Path::parse("/" + repeat("x", 256)).code(), StatusCode::invalid_path);
}

TEST(PathOps, PrefixParentChild)
{
    auto docs = *Path::parse("/docs");
    auto file = *Path::parse("/docs/a.txt");
    auto other = *Path::parse("/docsx/a.txt");
    EXPECT_TRUE(docs.is_prefix_of(file));
    EXPECT_TRUE(docs.is_prefix_of(docs));
    EXPECT_FALSE(docs.is_prefix_of(other));
    EXPECT_FALSE(file.is_prefix_of(docs));
    EXPECT_TRUE(Path().is_prefix_of(file));
    EXPECT_EQ(file.parent(), docs);
    EXPECT_EQ(docs.child("a.txt"), file);
    EXPECT_EQ(file.name(), "a.txt");
    EXPECT_TRUE(Path().parent().is_root());
}
