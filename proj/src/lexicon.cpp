#include "lexiscope/lexicon.hpp"

#include "lexiscope/format.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <set>
#include <unordered_set>

namespace lexiscope {

void CategorySpec::validate() const {
    if (trim(name).empty()) throw Error(ErrorCode::invalid_argument, "category name is empty");
    if (seeds.empty() || seeds.size() > 8)
        throw Error(ErrorCode::invalid_argument, "category '" + name + "' needs 1 to 8 seeds, got " +
                                                     std::to_string(seeds.size()));
    for (const auto& s : seeds)
        if (trim(s).empty()) throw Error(ErrorCode::invalid_argument, "category '" + name + "' has an empty seed");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorCode::invalid_argument, "threshold must lie strictly between 0 and 1");
    if (max_terms < 1) throw Error(ErrorCode::invalid_argument, "max_terms must be >= 1");
}

std::vector<std::string> CategorySpec::warnings() const {
    std::vector<std::string> out;
    if (seeds.size() < 2 || seeds.size() > 5)
        out.push_back("category '" + name + "' has " + std::to_string(seeds.size()) +
                      " seeds; 2 to 5 usually work best");
    return out;
}

std::string_view to_string(CategoryStatus status) noexcept {
    return status == CategoryStatus::unvalidated ? "unvalidated" : "crowd-filtered";
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::keep ? "keep" : "remove"; }

bool Category::contains(std::string_view word) const {
    return std::any_of(members.begin(), members.end(), [&](const ScoredTerm& t) { return t.word == word; });
}

std::vector<std::string> Category::member_words() const {
    std::vector<std::string> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.word);
    return out;
}

std::string current_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        if (auto v = parse_number<long long>(env)) t = static_cast<std::time_t>(*v);
        else t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex_fingerprint(std::uint64_t fingerprint) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fingerprint));
    return buf;
}

Category generate(const CategorySpec& spec, const Space& space, const GenerateOptions& options) {
    spec.validate();
    const auto query = query_vector(spec.name, spec.seeds, space, options.seed_vectors);
    const Vector<double> scores = similarities(space, query.vector);
    const RankBefore<double> before{&scores};

    std::vector<WordIndex> seeds;
    for (const auto& s : spec.seeds)
        if (auto idx = space.resolve(s); idx && std::find(seeds.begin(), seeds.end(), *idx) == seeds.end())
            seeds.push_back(*idx);
    std::sort(seeds.begin(), seeds.end(), before);

    std::vector<WordIndex> chosen(seeds.begin(), seeds.begin() + static_cast<std::ptrdiff_t>(
                                                                     std::min(seeds.size(), spec.max_terms)));
    if (chosen.size() < spec.max_terms) {
        std::vector<WordIndex> candidates;
        for (std::size_t i = 0; i < space.size(); ++i) {
            const auto idx = static_cast<WordIndex>(i);
            if (scores(idx) >= spec.threshold && std::find(seeds.begin(), seeds.end(), idx) == seeds.end())
                candidates.push_back(idx);
        }
        const std::size_t room = std::min(spec.max_terms - chosen.size(), candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(room), candidates.end(),
                          before);
        chosen.insert(chosen.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(room));
    }
    std::sort(chosen.begin(), chosen.end(), before);

    Category cat;
    cat.spec = spec;
    cat.status = CategoryStatus::unvalidated;
    for (WordIndex idx : chosen) cat.members.push_back({space.word(idx), scores(idx)});
    cat.provenance.generated_at = options.generated_at.empty() ? current_timestamp() : options.generated_at;
    cat.provenance.embedding_fingerprint = hex_fingerprint(space.fingerprint());
    return cat;
}

Category apply_crowd_filter(const Category& category, const std::map<std::string, Verdict>& verdicts) {
    if (category.status != CategoryStatus::unvalidated)
        throw Error(ErrorCode::invalid_argument, "category '" + category.spec.name + "' is already crowd-filtered");
    for (const auto& [word, verdict] : verdicts)
        if (!category.contains(word))
            throw Error(ErrorCode::unknown_word,
                        "verdict for '" + word + "', which is not a member of '" + category.spec.name + "'");
    Category out = category;
    out.members.clear();
    for (const auto& m : category.members) {
        auto it = verdicts.find(m.word);
        if (it == verdicts.end() || it->second == Verdict::keep) out.members.push_back(m);
    }
    out.status = CategoryStatus::crowd_filtered;
    return out;
}

std::vector<CategorySpec> permute_seeds(const CategorySpec& spec, const SeedPermutation& mode) {
    std::vector<CategorySpec> out;
    if (std::holds_alternative<DropOne>(mode)) {
        if (spec.seeds.size() < 2)
            throw Error(ErrorCode::invalid_argument,
                        "dropping a seed from '" + spec.name + "' would leave it without seeds");
        for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
            CategorySpec v = spec;
            v.seeds.erase(v.seeds.begin() + static_cast<std::ptrdiff_t>(i));
            out.push_back(std::move(v));
        }
    } else {
        const auto& sub = std::get<Substitute>(mode);
        auto it = std::find(spec.seeds.begin(), spec.seeds.end(), sub.from);
        if (it == spec.seeds.end())
            throw Error(ErrorCode::invalid_argument, "'" + sub.from + "' is not a seed of '" + spec.name + "'");
        CategorySpec v = spec;
        v.seeds[static_cast<std::size_t>(it - spec.seeds.begin())] = sub.to;
        out.push_back(std::move(v));
    }
    return out;
}

nlohmann::json category_to_json(const Category& category) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : category.members) members.push_back({{"word", m.word}, {"score", m.similarity}});
    return {
        {"schema_version", category_schema_version},
        {"name", category.spec.name},
        {"seeds", category.spec.seeds},
        {"threshold", category.spec.threshold},
        {"max_terms", category.spec.max_terms},
        {"status", std::string(to_string(category.status))},
        {"version", category.version},
        {"provenance",
         {{"generated_at", category.provenance.generated_at},
          {"embedding_fingerprint", category.provenance.embedding_fingerprint}}},
        {"members", members},
    };
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
    throw Error(ErrorCode::schema_violation, "field '" + field + "': " + what);
}

const nlohmann::json& require(const nlohmann::json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end()) schema_error(field, "missing");
    return *it;
}

std::string require_string(const nlohmann::json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_string()) schema_error(field, "expected a string");
    return v.get<std::string>();
}

double require_number(const nlohmann::json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_number()) schema_error(field, "expected a number");
    return v.get<double>();
}

std::uint64_t require_count(const nlohmann::json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        schema_error(field, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

Category category_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) schema_error("<root>", "expected an object");
    if (require_count(doc, "schema_version") != category_schema_version)
        schema_error("schema_version", "unsupported version");

    Category cat;
    cat.spec.name = require_string(doc, "name");
    const auto& seeds = require(doc, "seeds");
    if (!seeds.is_array()) schema_error("seeds", "expected an array of strings");
    for (const auto& s : seeds) {
        if (!s.is_string()) schema_error("seeds", "expected an array of strings");
        cat.spec.seeds.push_back(s.get<std::string>());
    }
    cat.spec.threshold = require_number(doc, "threshold");
    cat.spec.max_terms = require_count(doc, "max_terms");
    try {
        cat.spec.validate();
    } catch (const Error& e) {
        schema_error("spec", e.what());
    }

    const std::string status = require_string(doc, "status");
    if (status == "unvalidated") cat.status = CategoryStatus::unvalidated;
    else if (status == "crowd-filtered") cat.status = CategoryStatus::crowd_filtered;
    else schema_error("status", "unknown value '" + status + "'");

    if (doc.contains("version")) cat.version = require_count(doc, "version");
    if (doc.contains("provenance")) {
        const auto& p = doc["provenance"];
        if (!p.is_object()) schema_error("provenance", "expected an object");
        cat.provenance.generated_at = require_string(p, "generated_at");
        cat.provenance.embedding_fingerprint = require_string(p, "embedding_fingerprint");
    }

    const auto& members = require(doc, "members");
    if (!members.is_array()) schema_error("members", "expected an array");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& m = members[i];
        const std::string where = "members[" + std::to_string(i) + "]";
        if (!m.is_object()) schema_error(where, "expected an object");
        ScoredTerm term;
        try {
            term.word = require_string(m, "word");
            term.similarity = require_number(m, "score");
        } catch (const Error& e) {
            schema_error(where, e.what());
        }
        if (!seen.insert(term.word).second) schema_error(where, "duplicate member '" + term.word + "'");
        if (!std::isfinite(term.similarity) || std::abs(term.similarity) > 1.0 + 1e-9)
            schema_error(where + ".score", "similarity must lie in [-1, 1]");
        const bool is_seed = std::any_of(cat.spec.seeds.begin(), cat.spec.seeds.end(), [&](const std::string& s) {
            const auto lower = to_lower_ascii(s);
            return term.word == s || term.word == lower || term.word == text::normalize_word(lower);
        });
        if (!is_seed && term.similarity < cat.spec.threshold)
            schema_error(where + ".score", "'" + term.word + "' is below the category threshold");
        if (i > 0 && term.similarity > cat.members.back().similarity)
            schema_error(where, "members must be sorted by score, highest first");
        cat.members.push_back(std::move(term));
    }
    if (cat.members.size() > cat.spec.max_terms) schema_error("members", "more members than max_terms");
    return cat;
}

std::string serialize_category(const Category& category) { return category_to_json(category).dump(2) + "\n"; }

Category parse_category(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse_error, std::string("category file is not valid JSON: ") + e.what());
    }
    return category_from_json(doc);
}

void save_category(const Category& category, const std::string& path) {
    write_file(path, serialize_category(category));
}

Category load_category(const std::string& path) {
    try {
        return parse_category(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io_error) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string category_slug(std::string_view name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
        if (c >= 'A' && c <= 'Z') out.push_back(static_cast<char>(c - 'A' + 'a'));
        else out.push_back(ok ? c : '_');
    }
    if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
    return out;
}

void SeedCatalog::add(CategorySpec spec) {
    spec.validate();
    if (find(spec.name)) throw Error(ErrorCode::invalid_argument, "duplicate catalog entry '" + spec.name + "'");
    entries_.push_back(std::move(spec));
}

void SeedCatalog::merge(const SeedCatalog& other) {
    for (const auto& e : other.entries_) add(e);
}

const CategorySpec* SeedCatalog::find(std::string_view name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

SeedCatalog SeedCatalog::parse(std::string_view text, std::string_view source) {
    SeedCatalog catalog;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no);
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error(ErrorCode::parse_error, where + ": expected name<TAB>seeds");
        CategorySpec spec;
        spec.name = trim(std::string_view(line).substr(0, tab));
        std::string_view rest = std::string_view(line).substr(tab + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string seed = trim(rest.substr(0, comma));
            if (seed.empty()) throw Error(ErrorCode::parse_error, where + ": empty seed");
            spec.seeds.push_back(seed);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        try {
            catalog.add(std::move(spec));
        } catch (const Error& e) {
            throw Error(ErrorCode::parse_error, where + ": " + e.what());
        }
        if (nl == text.size()) break;
    }
    return catalog;
}

SeedCatalog SeedCatalog::load(const std::string& path) { return parse(read_file(path), path); }

SeedCatalog SeedCatalog::builtin() {
    SeedCatalog c;
    c.add({"death", {"bury", "coffin", "kill", "corpse"}});
    c.add({"lust", {"desire", "passion", "infatuation"}});
    c.add({"clothing", {"shirt", "hat"}});
    c.add({"social media", {"facebook", "twitter"}});
    c.add({"spatial", {"big", "small", "circular"}});
    return c;
}

}  // namespace lexiscope
