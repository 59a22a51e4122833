#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexiscope {

/// A corpus is a sequence of documents (or sentences) of normalized tokens.
using Corpus = std::vector<std::vector<std::string>>;

using WordIndex = std::int32_t;

struct VocabEntry {
    std::string word;
    std::uint64_t count = 0;
};

struct VocabularyOptions {
    std::uint64_t min_count = 30;
    /// Words whose natural-log relative frequency exceeds this are stopwords.
    /// nullopt disables the rule.
    std::optional<double> stopword_logprob = -8.0;
};

/// Word <-> dense index map with corpus counts. Entries are ordered by count
/// descending, then by word, so the result does not depend on corpus order.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<VocabEntry> entries, std::uint64_t total_tokens);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    const VocabEntry& operator[](WordIndex i) const { return entries_[static_cast<std::size_t>(i)]; }
    const std::vector<VocabEntry>& entries() const noexcept { return entries_; }

    std::optional<WordIndex> find(std::string_view word) const;

    /// Tokens seen in the corpus before any filtering.
    std::uint64_t total_tokens() const noexcept { return total_tokens_; }

    /// Sum of counts of the retained words.
    std::uint64_t retained_tokens() const noexcept { return retained_tokens_; }

    std::vector<std::string> words() const;

    /// Maps a sentence to indices, dropping out-of-vocabulary tokens.
    std::vector<WordIndex> encode(const std::vector<std::string>& sentence) const;

private:
    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, WordIndex> index_;
    std::uint64_t total_tokens_ = 0;
    std::uint64_t retained_tokens_ = 0;
};

/// Keeps exactly the words with count >= min_count that are not stopwords.
/// Throws empty_vocabulary when the corpus holds no tokens.
Vocabulary build_vocabulary(const Corpus& corpus, const VocabularyOptions& options);

/// True when ln(count / total) > logprob_limit.
bool is_stopword(std::uint64_t count, std::uint64_t total, double logprob_limit);

}  // namespace lexiscope
