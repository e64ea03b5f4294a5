#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mikfs/core/status.hpp"

namespace mikfs::core {

// Shell-style pattern over Unicode scalars: '*' any run, '?' one scalar,
// '[abc]' / '[a-z]' / '[!x]' / '[^x]' classes, '\' escapes the next scalar.
// '/' has no special meaning.
class Glob {
public:
    // InvalidArgument for malformed UTF-8, an unterminated class or a
    // trailing escape.
    static Result<Glob> compile(std::string_view pattern);

    bool matches(std::string_view text) const;

    const std::string& pattern() const { return pattern_; }

private:
    struct Range {
        char32_t low;
        char32_t high;
    };
    struct Token {
        enum class Kind { literal, any_one, any_run, char_class } kind;
        char32_t literal = 0;
        bool negated = false;
        std::vector<Range> ranges;
    };

    bool match_from(const std::u32string& text, std::size_t token_index, std::size_t text_index) const;
    static bool class_matches(const Token& token, char32_t c);

    std::string pattern_;
    std::vector<Token> tokens_;
};

}  // namespace mikfs::core
