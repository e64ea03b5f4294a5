#include "mikfs/core/glob.hpp"

#include "mikfs/core/path.hpp"

namespace mikfs::core {

Result<Glob> Glob::compile(std::string_view pattern)
{
    auto decoded = utf8_decode(pattern);
    if (!decoded) {
        return make_error(StatusCode::invalid_argument, "glob is not valid UTF-8");
    }
    const std::u32string& p = *decoded;

    Glob glob;
    glob.pattern_ = std::string(pattern);
    for (std::size_t i = 0; i < p.size(); ++i) {
        Token token{};
        switch (p[i]) {
        case U'*':
            // Collapse runs of '*'.
            if (!glob.tokens_.empty() && glob.tokens_.back().kind == Token::Kind::any_run) {
                continue;
            }
            token.kind = Token::Kind::any_run;
            break;
        case U'?':
            token.kind = Token::Kind::any_one;
            break;
        case U'\\':
            if (i + 1 >= p.size()) {
                return make_error(StatusCode::invalid_argument, "glob ends with an escape");
            }
            token.kind = Token::Kind::literal;
            token.literal = p[++i];
            break;
        case U'[': {
            token.kind = Token::Kind::char_class;
            std::size_t j = i + 1;
            if (j < p.size() && (p[j] == U'!' || p[j] == U'^')) {
                token.negated = true;
                ++j;
            }
            bool first = true;
            bool closed = false;
            while (j < p.size()) {
                if (p[j] == U']' && !first) {
                    closed = true;
                    break;
                }
                char32_t low = p[j];
                if (low == U'\\' && j + 1 < p.size()) {
                    low = p[++j];
                }
                char32_t high = low;
                if (j + 2 < p.size() && p[j + 1] == U'-' && p[j + 2] != U']') {
                    high = p[j + 2];
                    j += 2;
                    if (high == U'\\' && j + 1 < p.size()) {
                        high = p[++j];
                    }
                }
                if (high < low) {
                    std::swap(low, high);
                }
                token.ranges.push_back({low, high});
                first = false;
                ++j;
            }
            if (!closed) {
                return make_error(StatusCode::invalid_argument, "glob has an unterminated '['");
            }
            i = j;
            break;
        }
        default:
            token.kind = Token::Kind::literal;
            token.literal = p[i];
            break;
        }
        glob.tokens_.push_back(std::move(token));
    }
    return glob;
}

bool Glob::class_matches(const Token& token, char32_t c)
{
    bool hit = false;
    for (const auto& range : token.ranges) {
        if (c >= range.low && c <= range.high) {
            hit = true;
            break;
        }
    }
    return hit != token.negated;
}

bool Glob::match_from(const std::u32string& text, std::size_t ti, std::size_t si) const
{
    // Iterative with a single backtrack point for the most recent '*'.
    std::size_t star_token = std::u32string::npos;
    std::size_t star_text = 0;
    while (si < text.size()) {
        if (ti < tokens_.size()) {
            const Token& token = tokens_[ti];
            if (token.kind == Token::Kind::any_run) {
                star_token = ti++;
                star_text = si;
                continue;
            }
            bool step = false;
            switch (token.kind) {
            case Token::Kind::literal:
                step = token.literal == text[si];
                break;
            case Token::Kind::any_one:
                step = true;
                break;
            case Token::Kind::char_class:
                step = class_matches(token, text[si]);
                break;
            case Token::Kind::any_run:
                break;
            }
            if (step) {
                ++ti;
                ++si;
                continue;
            }
        }
        if (star_token == std::u32string::npos) {
            return false;
        }
        ti = star_token + 1;
        si = ++star_text;
    }
    while (ti < tokens_.size() && tokens_[ti].kind == Token::Kind::any_run) {
        ++ti;
    }
    return ti == tokens_.size();
}

bool Glob::matches(std::string_view text) const
{
    auto decoded = utf8_decode(text);
    if (!decoded) {
        return false;
    }
    return match_from(*decoded, 0, 0);
}

}  // namespace mikfs::core
