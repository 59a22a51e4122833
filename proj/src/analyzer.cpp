#include "lexiscope/analyzer.hpp"

#include "lexiscope/csv.hpp"
#include "lexiscope/format.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <unordered_set>

namespace lexiscope {

const CategoryCount* AnalysisResult::find(std::string_view category) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == category) return &counts[i];
    return nullptr;
}

CategoryMatcher::CategoryMatcher(const std::vector<Category>& categories, text::Normalizer normalizer)
    : normalizer_(std::move(normalizer)) {
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const auto& name = categories[c].spec.name;
        if (!seen.insert(name).second) throw Error(ErrorCode::invalid_argument, "duplicate category '" + name + "'");
        names_.push_back(name);
        for (const auto& m : categories[c].members) {
            auto& list = members_[normalizer_(to_lower_ascii(m.word))];
            if (list.empty() || list.back() != c) list.push_back(c);
        }
    }
}

const std::vector<std::size_t>* CategoryMatcher::lookup(const std::string& normalized) const {
    auto it = members_.find(normalized);
    return it == members_.end() ? nullptr : &it->second;
}

AnalysisResult analyze(std::string_view document, const CategoryMatcher& matcher) {
    AnalysisResult result;
    result.categories = matcher.names();
    result.counts.assign(result.categories.size(), {});
    const auto tokens = text::tokenize(document, matcher.normalizer());
    result.total_tokens = tokens.size();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const auto* cats = matcher.lookup(tokens[t].normalized);
        if (!cats) continue;
        for (std::size_t c : *cats) {
            ++result.counts[c].raw;
            result.matches.push_back({c, t, tokens[t].begin, tokens[t].end, tokens[t].surface});
        }
    }
    if (result.total_tokens > 0)
        for (auto& count : result.counts)
            count.normalized = static_cast<double>(count.raw) / static_cast<double>(result.total_tokens);
    return result;
}

AnalysisResult analyze(std::string_view document, const std::vector<Category>& categories) {
    return analyze(document, CategoryMatcher(categories));
}

DocumentSource line_documents(std::istream& in) {
    auto line_no = std::make_shared<std::size_t>(0);
    return [&in, line_no]() -> std::optional<Document> {
        std::string line;
        while (std::getline(in, line)) {
            ++*line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            return Document{std::to_string(*line_no), "", std::move(line), ""};
        }
        return std::nullopt;
    };
}

DocumentSource manifest_documents(const std::string& manifest_path) {
    auto in = std::make_shared<std::ifstream>(manifest_path);
    if (!*in) throw Error(ErrorCode::io_error, "cannot open manifest '" + manifest_path + "'");
    const auto base = std::filesystem::path(manifest_path).parent_path();
    auto line_no = std::make_shared<std::size_t>(0);
    return [in, base, line_no, manifest_path]() -> std::optional<Document> {
        std::string line;
        while (std::getline(*in, line)) {
            ++*line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto fields = split_whitespace(line);
            if (fields.empty()) continue;
            if (fields.size() > 2)
                throw Error(ErrorCode::parse_error, manifest_path + ":" + std::to_string(*line_no) +
                                                        ": expected '<path> [group]'");
            Document doc;
            doc.id = std::string(fields[0]);
            if (fields.size() == 2) doc.group = std::string(fields[1]);
            auto path = std::filesystem::path(doc.id);
            if (path.is_relative()) path = base / path;
            try {
                doc.text = read_file(path.string());
            } catch (const Error& e) {
                doc.error = e.what();
            }
            return doc;
        }
        return std::nullopt;
    };
}

CorpusTotals analyze_corpus(const DocumentSource& source, const CategoryMatcher& matcher,
                            const std::function<void(const DocumentAnalysis&)>& sink) {
    CorpusTotals totals;
    totals.categories = matcher.names();
    totals.raw.assign(totals.categories.size(), 0);
    while (auto doc = source()) {
        DocumentAnalysis out{doc->id, doc->group, std::nullopt, doc->error};
        ++totals.documents;
        if (doc->text) {
            out.result = analyze(*doc->text, matcher);
            totals.total_tokens += out.result->total_tokens;
            for (std::size_t c = 0; c < totals.raw.size(); ++c) totals.raw[c] += out.result->counts[c].raw;
        } else {
            ++totals.failed;
            if (out.error.empty()) out.error = "document unreadable";
        }
        sink(out);
    }
    return totals;
}

std::string format_analysis_rows(const DocumentAnalysis& doc) {
    std::string out;
    if (!doc.result) return out;
    const auto& r = *doc.result;
    for (std::size_t c = 0; c < r.categories.size(); ++c)
        out += csv::format_row({doc.id, r.categories[c], std::to_string(r.counts[c].raw),
                                format_number(r.counts[c].normalized), std::to_string(r.total_tokens)});
    return out;
}

std::vector<AnalysisRow> parse_analysis_csv(std::string_view text) {
    std::vector<AnalysisRow> rows;
    for (const auto& rec : csv::parse_with_header(text, analysis_csv_header)) {
        const auto& f = rec.fields;
        const auto raw = parse_number<std::uint64_t>(f[2]);
        const auto normalized = parse_number<double>(f[3]);
        const auto tokens = parse_number<std::uint64_t>(f[4]);
        if (!raw || !normalized || !tokens)
            throw Error(ErrorCode::parse_error, "row " + std::to_string(rec.line) + ": malformed number");
        rows.push_back({f[0], f[1], *raw, *normalized, *tokens});
    }
    return rows;
}

nlohmann::json analysis_to_json(const AnalysisResult& result) {
    nlohmann::json per_category = nlohmann::json::object();
    for (std::size_t c = 0; c < result.categories.size(); ++c)
        per_category[result.categories[c]] = {{"raw", result.counts[c].raw},
                                              {"normalized", result.counts[c].normalized}};
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& m : result.matches)
        matches.push_back({{"category", result.categories[m.category]},
                           {"start", m.begin},
                           {"end", m.end},
                           {"word", m.word},
                           {"token_index", m.token_index}});
    return {{"per_category", per_category}, {"matches", matches}, {"total_tokens", result.total_tokens}};
}

}  // namespace lexiscope
