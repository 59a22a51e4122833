#include "lexiscope/text.hpp"

#include "lexiscope/format.hpp"

namespace lexiscope::text {
namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_joiner(char c) { return c == '-' || c == '\''; }

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
    for (char c : s)
        if (is_vowel(c) || c == 'y') return true;
    return false;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool plain_lowercase(std::string_view w) {
    for (char c : w)
        if (c < 'a' || c > 'z') return false;
    return true;
}

// Repairs a stem after -ing/-ed removal: "runn" -> "run", "creat" -> "create", "hop" -> "hope".
std::string repair_stem(std::string stem) {
    const std::size_t n = stem.size();
    const char last = stem[n - 1];
    if (n >= 2 && last == stem[n - 2] && !is_vowel(last) && last != 'l' && last != 's' && last != 'z') {
        stem.pop_back();
        return stem;
    }
    if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz")) {
        stem.push_back('e');
        return stem;
    }
    if (n == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(last) && last != 'w' && last != 'x' &&
        last != 'y') {
        stem.push_back('e');
    }
    return stem;
}

// One rewrite; returns the input unchanged when no rule applies.
std::string strip_once(const std::string& w) {
    const std::size_t n = w.size();
    if (ends_with(w, "sses")) return w.substr(0, n - 2);
    if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + "y";
    if (ends_with(w, "es") && n >= 5) {
        const std::string_view stem = std::string_view(w).substr(0, n - 2);
        if (ends_with(stem, "ss") || ends_with(stem, "x") || ends_with(stem, "z") || ends_with(stem, "ch") ||
            ends_with(stem, "sh"))
            return std::string(stem);
    }
    if (ends_with(w, "s") && n > 3 && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is"))
        return w.substr(0, n - 1);
    if (ends_with(w, "ing") && n >= 6) {
        std::string stem = w.substr(0, n - 3);
        if (has_vowel(stem)) return repair_stem(std::move(stem));
    }
    if (ends_with(w, "ied") && n >= 4) {
        return n > 4 ? w.substr(0, n - 3) + "y" : w.substr(0, n - 1);
    }
    if (ends_with(w, "ed") && !ends_with(w, "eed") && n >= 5) {
        std::string stem = w.substr(0, n - 2);
        if (has_vowel(stem)) return repair_stem(std::move(stem));
    }
    return w;
}

}  // namespace

std::string normalize_word(std::string_view lowercase_word) {
    std::string w(lowercase_word);
    if (!plain_lowercase(w)) return w;
    // every rule strictly shortens or keeps the word, so this terminates
    for (;;) {
        std::string next = strip_once(w);
        if (next == w) return w;
        w = std::move(next);
    }
}

TokenStream tokenize(std::string_view text, const Normalizer& normalizer) {
    TokenStream out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < n) {
            if (is_word_byte(static_cast<unsigned char>(text[i]))) {
                ++i;
            } else if (is_joiner(text[i]) && i + 1 < n && is_word_byte(static_cast<unsigned char>(text[i + 1]))) {
                ++i;
            } else {
                break;
            }
        }
        Token tok;
        tok.surface = std::string(text.substr(begin, i - begin));
        tok.normalized = normalizer(to_lower_ascii(tok.surface));
        tok.begin = begin;
        tok.end = i;
        out.push_back(std::move(tok));
    }
    return out;
}

std::vector<std::string> normalized_tokens(std::string_view text, const Normalizer& normalizer) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text, normalizer)) out.push_back(std::move(tok.normalized));
    return out;
}

}  // namespace lexiscope::text
