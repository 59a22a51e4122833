#pragma once

#include "lexiscope/vsm.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lexiscope {

using Space = VectorSpace<double>;

struct CategorySpec {
    std::string name;
    std::vector<std::string> seeds;
    double threshold = 0.5;
    std::size_t max_terms = 200;

    /// Hard limits: 1..8 seeds, 0 < threshold < 1, max_terms >= 1, non-empty
    /// seeds and name. Throws invalid_argument.
    void validate() const;

    /// Soft limits (2..5 seeds). Empty when the spec is conventional.
    std::vector<std::string> warnings() const;

    friend bool operator==(const CategorySpec&, const CategorySpec&) = default;
};

enum class CategoryStatus { unvalidated, crowd_filtered };

std::string_view to_string(CategoryStatus status) noexcept;

struct Provenance {
    std::string generated_at;           // ISO-8601 UTC
    std::string embedding_fingerprint;  // 16 hex digits

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Category {
    CategorySpec spec;
    std::vector<ScoredTerm> members;  // similarity descending
    CategoryStatus status = CategoryStatus::unvalidated;
    Provenance provenance;
    std::uint64_t version = 1;

    bool contains(std::string_view word) const;
    std::vector<std::string> member_words() const;

    friend bool operator==(const Category&, const Category&) = default;
};

enum class Verdict { keep, remove };

std::string_view to_string(Verdict v) noexcept;

struct GenerateOptions {
    SeedVectors seed_vectors = SeedVectors::unit;
    /// Empty means current_timestamp().
    std::string generated_at;
};

/// ISO-8601 UTC time. Honors SOURCE_DATE_EPOCH so pipelines can be reproducible.
std::string current_timestamp();

std::string hex_fingerprint(std::uint64_t fingerprint);

/// Expands seeds through the space: every word whose cosine with the category
/// query reaches spec.threshold, capped at spec.max_terms. In-vocabulary seeds
/// are always members and count toward the cap. Ties in similarity are broken
/// by vocabulary index, so the result is deterministic.
Category generate(const CategorySpec& spec, const Space& space, const GenerateOptions& options = {});

/// Drops the words marked remove. Throws unknown_word for a verdict on a
/// non-member and invalid_argument when the category was already filtered.
Category apply_crowd_filter(const Category& category, const std::map<std::string, Verdict>& verdicts);

struct DropOne {};
struct Substitute {
    std::string from;
    std::string to;
};
using SeedPermutation = std::variant<DropOne, Substitute>;

/// Seed-sensitivity variants: one spec per dropped seed, or a single spec with
/// one seed replaced.
std::vector<CategorySpec> permute_seeds(const CategorySpec& spec, const SeedPermutation& mode);

inline constexpr int category_schema_version = 1;

nlohmann::json category_to_json(const Category& category);

/// Validates the schema and the category invariants; errors name the field.
Category category_from_json(const nlohmann::json& doc);

std::string serialize_category(const Category& category);
Category parse_category(std::string_view text);
void save_category(const Category& category, const std::string& path);
Category load_category(const std::string& path);

/// File-safe stem for a category name ("social media" -> "social_media").
std::string category_slug(std::string_view name);

/// Named seed lists, one per line: `name<TAB>seed, seed, ...`. `#` starts a comment.
class SeedCatalog {
public:
    void add(CategorySpec spec);
    void merge(const SeedCatalog& other);

    const std::vector<CategorySpec>& entries() const noexcept { return entries_; }
    const CategorySpec* find(std::string_view name) const;

    static SeedCatalog parse(std::string_view text, std::string_view source = "<catalog>");
    static SeedCatalog load(const std::string& path);

    /// Shipped seed lists: death, lust, clothing, social media, spatial.
    static SeedCatalog builtin();

private:
    std::vector<CategorySpec> entries_;
};

}  // namespace lexiscope
