#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lexiscope::text {

struct Token {
    std::string surface;
    std::string normalized;
    std::size_t begin = 0;  // byte offset into the source text
    std::size_t end = 0;    // one past the last byte
};

using TokenStream = std::vector<Token>;

/// Maps a lowercase word to its normalized form. Must be idempotent.
using Normalizer = std::function<std::string(std::string_view)>;

/// Rule-based suffix stripper: plural -s/-es/-ies, -ing and -ed with
/// consonant undoubling and silent-e restoration. Applied until a fixed point,
/// so normalize(normalize(w)) == normalize(w). Tokens containing hyphens,
/// apostrophes or digits are compounds and pass through unchanged.
std::string normalize_word(std::string_view lowercase_word);

/// Splits on non-word characters. Word characters are ASCII letters and digits
/// plus every byte >= 0x80 (UTF-8 sequences are never split). A hyphen or
/// apostrophe between two word characters stays inside the token.
/// Surfaces keep their case; normalized forms are lowercased (ASCII) and passed
/// through `normalizer`.
TokenStream tokenize(std::string_view text, const Normalizer& normalizer = normalize_word);

/// Normalized forms only; the usual input to vocabulary building.
std::vector<std::string> normalized_tokens(std::string_view text,
                                           const Normalizer& normalizer = normalize_word);

}  // namespace lexiscope::text
