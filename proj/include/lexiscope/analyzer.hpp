#pragma once

#include "lexiscope/lexicon.hpp"
#include "lexiscope/text.hpp"

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexiscope {

struct CategoryCount {
    std::uint64_t raw = 0;
    double normalized = 0.0;  // raw / total_tokens, 0 for an empty document

    friend bool operator==(const CategoryCount&, const CategoryCount&) = default;
};

struct Match {
    std::size_t category = 0;     // index into AnalysisResult::categories
    std::size_t token_index = 0;
    std::size_t begin = 0;        // byte span into the analyzed text
    std::size_t end = 0;
    std::string word;             // surface form as it appears in the text

    friend bool operator==(const Match&, const Match&) = default;
};

struct AnalysisResult {
    std::vector<std::string> categories;
    std::vector<CategoryCount> counts;  // parallel to categories
    std::uint64_t total_tokens = 0;
    std::vector<Match> matches;         // token order, then category order

    const CategoryCount* find(std::string_view category) const;

    friend bool operator==(const AnalysisResult&, const AnalysisResult&) = default;
};

/// Member lookup for a fixed list of categories, keyed by normalized form.
class CategoryMatcher {
public:
    explicit CategoryMatcher(const std::vector<Category>& categories,
                             text::Normalizer normalizer = text::normalize_word);

    const std::vector<std::string>& names() const noexcept { return names_; }
    const text::Normalizer& normalizer() const noexcept { return normalizer_; }

    /// Categories (ascending index) containing the normalized form, or null.
    const std::vector<std::size_t>* lookup(const std::string& normalized) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::vector<std::size_t>> members_;
    text::Normalizer normalizer_;
};

/// Counts category terms: a token matches when its normalized form equals a
/// member's normalized form. A token in two categories counts once in each.
AnalysisResult analyze(std::string_view document, const CategoryMatcher& matcher);
AnalysisResult analyze(std::string_view document, const std::vector<Category>& categories);

struct Document {
    std::string id;
    std::string group;                // empty when the source carries no labels
    std::optional<std::string> text;  // nullopt when unreadable
    std::string error;
};

/// Pull-based stream; returns nullopt at the end.
using DocumentSource = std::function<std::optional<Document>()>;

/// One document per non-empty line; ids are 1-based line numbers.
DocumentSource line_documents(std::istream& in);

/// Manifest lines: `<path> [group]`, whitespace separated, `#` comments.
/// Relative paths resolve against the manifest's directory. Files are read
/// lazily, one at a time.
DocumentSource manifest_documents(const std::string& manifest_path);

struct DocumentAnalysis {
    std::string id;
    std::string group;
    std::optional<AnalysisResult> result;  // nullopt on a per-document error
    std::string error;
};

struct CorpusTotals {
    std::vector<std::string> categories;
    std::vector<std::uint64_t> raw;  // parallel to categories
    std::uint64_t total_tokens = 0;
    std::size_t documents = 0;
    std::size_t failed = 0;
};

/// Streams documents through `analyze`, handing each result to `sink` in
/// input order. Unreadable documents produce an error record and processing
/// continues.
CorpusTotals analyze_corpus(const DocumentSource& source, const CategoryMatcher& matcher,
                            const std::function<void(const DocumentAnalysis&)>& sink);

inline const std::vector<std::string> analysis_csv_header{"doc_id", "category", "raw", "normalized", "tokens"};

/// Rows of the analysis CSV for one document (no header).
std::string format_analysis_rows(const DocumentAnalysis& doc);

struct AnalysisRow {
    std::string doc_id;
    std::string category;
    std::uint64_t raw = 0;
    double normalized = 0.0;
    std::uint64_t tokens = 0;
};

std::vector<AnalysisRow> parse_analysis_csv(std::string_view text);

nlohmann::json analysis_to_json(const AnalysisResult& result);

}  // namespace lexiscope
