#ifndef MIC_TEXT_HPP
#define MIC_TEXT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mic {

/// The literal prompt token that names image j, e.g. "[IMG3]".
inline std::string proxy_token(std::uint32_t j) {
    return "[IMG" + std::to_string(j) + "]";
}

namespace text {

inline bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Parses a decimal run starting at `pos`; advances `pos` past it.
inline std::optional<std::uint32_t> read_number(std::string_view s, std::size_t& pos) {
    if (pos >= s.size() || !is_digit(s[pos])) return std::nullopt;
    std::uint64_t v = 0;
    while (pos < s.size() && is_digit(s[pos])) {
        v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
        if (v > 0xffffffffull) return std::nullopt;
        ++pos;
    }
    return static_cast<std::uint32_t>(v);
}

/// Matches "[IMG<d>]" at `pos`. On success returns d and advances `pos` past ']'.
inline std::optional<std::uint32_t> match_proxy_token(std::string_view s, std::size_t& pos) {
    static constexpr std::string_view kHead = "[IMG";
    if (s.compare(pos, kHead.size(), kHead) != 0) return std::nullopt;
    std::size_t p = pos + kHead.size();
    auto d = read_number(s, p);
    if (!d || p >= s.size() || s[p] != ']') return std::nullopt;
    pos = p + 1;
    return d;
}

/// Number of occurrences of the exact token "[IMG<j>]" in `s`.
inline std::size_t count_proxy_token(std::string_view s, std::uint32_t j) {
    std::size_t n = 0;
    for (std::size_t i = 0; i + 5 < s.size(); ++i) {
        if (s[i] != '[') continue;
        std::size_t p = i;
        auto d = match_proxy_token(s, p);
        if (d && *d == j) ++n;
    }
    return n;
}

inline bool contains_any_proxy_token(std::string_view s) {
    for (std::size_t i = 0; i + 5 < s.size(); ++i) {
        if (s[i] != '[') continue;
        std::size_t p = i;
        if (match_proxy_token(s, p)) return true;
    }
    return false;
}

// Declaration phrases bind prose index and proxy token together:
// "image <d> is [IMG<d>]", "image <d>: [IMG<d>]", and the looser mention
// forms "image <d> labeled [IMG<d>]" / "image <d> [IMG<d>]" that instruction
// text uses when referring back to a declared image.
inline const std::vector<std::string_view>& declaration_separators() {
    static const std::vector<std::string_view> seps = {" is ", ": ", " labeled ", " "};
    return seps;
}

struct phrase_match {
    std::size_t end;            // one past the matched phrase
    std::uint32_t index;        // the shared number d
    std::size_t sep;            // index into declaration_separators()
};

/// Matches "image <d><sep>[IMG<d>]" starting at `pos` (which must point at 'i'
/// on a word boundary). Both numbers must agree.
inline std::optional<phrase_match> match_image_phrase(std::string_view s, std::size_t pos) {
    static constexpr std::string_view kImage = "image ";
    if (pos > 0 && is_word_char(s[pos - 1])) return std::nullopt;
    if (s.compare(pos, kImage.size(), kImage) != 0) return std::nullopt;
    std::size_t p = pos + kImage.size();
    auto d = read_number(s, p);
    if (!d) return std::nullopt;
    const auto& seps = declaration_separators();
    for (std::size_t si = 0; si < seps.size(); ++si) {
        if (s.compare(p, seps[si].size(), seps[si]) != 0) continue;
        std::size_t q = p + seps[si].size();
        auto d2 = match_proxy_token(s, q);
        if (d2 && *d2 == *d) return phrase_match{q, *d, si};
    }
    return std::nullopt;
}

/// True when the phrase is one of the two canonical declaration forms of the
/// image-declaration scheme (" is " / ": "), as opposed to a back-reference.
inline bool is_declaration_separator(std::size_t sep) { return sep <= 1; }

/// Counts canonical declaration phrases for image j ("image j is [IMGj]" or
/// "image j: [IMGj]").
inline std::size_t count_declarations(std::string_view s, std::uint32_t j) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 'i') continue;
        auto m = match_image_phrase(s, i);
        if (m && m->index == j && is_declaration_separator(m->sep)) ++n;
    }
    return n;
}

/// Rewrites every proxy token (and the prose index of any image phrase bound
/// to one) through `map`. `map` may throw to reject an unknown index.
inline std::string rewrite_proxies(std::string_view s,
                                   const std::function<std::uint32_t(std::uint32_t)>& map) {
    std::string out;
    out.reserve(s.size() + 8);
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == 'i') {
            if (auto m = match_image_phrase(s, i)) {
                std::uint32_t g = map(m->index);
                out += "image ";
                out += std::to_string(g);
                out += declaration_separators()[m->sep];
                out += proxy_token(g);
                i = m->end;
                continue;
            }
        }
        if (s[i] == '[') {
            std::size_t p = i;
            if (auto d = match_proxy_token(s, p)) {
                out += proxy_token(map(*d));
                i = p;
                continue;
            }
        }
        out += s[i++];
    }
    return out;
}

/// Token count under the default tokenizer: maximal runs of non-whitespace.
inline std::uint64_t whitespace_tokens(std::string_view s) {
    std::uint64_t n = 0;
    bool in_token = false;
    for (char c : s) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (ws) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

}  // namespace text
}  // namespace mic

#endif  // MIC_TEXT_HPP
