#include "lexiscope/vocabulary.hpp"

#include "lexiscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lexiscope {

Vocabulary::Vocabulary(std::vector<VocabEntry> entries, std::uint64_t total_tokens)
    : entries_(std::move(entries)), total_tokens_(total_tokens) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto [it, inserted] = index_.emplace(entries_[i].word, static_cast<WordIndex>(i));
        if (!inserted) throw Error(ErrorCode::invalid_argument, "duplicate vocabulary word '" + entries_[i].word + "'");
        retained_tokens_ += entries_[i].count;
    }
}

std::optional<WordIndex> Vocabulary::find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Vocabulary::words() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.word);
    return out;
}

std::vector<WordIndex> Vocabulary::encode(const std::vector<std::string>& sentence) const {
    std::vector<WordIndex> out;
    out.reserve(sentence.size());
    for (const auto& w : sentence)
        if (auto idx = find(w)) out.push_back(*idx);
    return out;
}

bool is_stopword(std::uint64_t count, std::uint64_t total, double logprob_limit) {
    return std::log(static_cast<double>(count) / static_cast<double>(total)) > logprob_limit;
}

Vocabulary build_vocabulary(const Corpus& corpus, const VocabularyOptions& options) {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t total = 0;
    for (const auto& sentence : corpus) {
        for (const auto& tok : sentence) {
            ++counts[tok];
            ++total;
        }
    }
    if (total == 0) throw Error(ErrorCode::empty_vocabulary, "corpus contains no tokens");

    std::vector<VocabEntry> kept;
    for (auto& [word, count] : counts) {
        if (count < options.min_count) continue;
        if (options.stopword_logprob && is_stopword(count, total, *options.stopword_logprob)) continue;
        kept.push_back({word, count});
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const VocabEntry& a, const VocabEntry& b) { return a.count > b.count; });
    return Vocabulary(std::move(kept), total);
}

}  // namespace lexiscope
