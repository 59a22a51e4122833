#pragma once

#include "lexiscope/embedding_io.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/sgns.hpp"
#include "lexiscope/text.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lexiscope {

/// A·B / (|A| |B|). Throws undefined_similarity for a zero vector.
template <class DerivedA, class DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::invalid_argument, "cosine of vectors with different dims");
    const auto na = a.norm();
    const auto nb = b.norm();
    if (na == 0 || nb == 0) throw Error(ErrorCode::undefined_similarity, "cosine similarity with a zero vector");
    return a.dot(b) / (na * nb);
}

struct ScoredTerm {
    std::string word;
    double similarity = 0.0;

    friend bool operator==(const ScoredTerm&, const ScoredTerm&) = default;
};

/// How seed vectors enter a category query.
enum class SeedVectors { unit, raw };

/// Immutable word vectors with rows normalized to unit length at construction,
/// so cosine against a unit query is a single matrix-vector product.
template <class Scalar>
class VectorSpace {
public:
    VectorSpace(std::vector<std::string> words, RowMatrix<Scalar> vectors)
        : words_(std::move(words)), raw_(std::move(vectors)) {
        if (static_cast<Eigen::Index>(words_.size()) != raw_.rows())
            throw Error(ErrorCode::invalid_argument, "word count does not match matrix rows");
        unit_.resize(raw_.rows(), raw_.cols());
        for (Eigen::Index r = 0; r < raw_.rows(); ++r) {
            const Scalar norm = raw_.row(r).norm();
            if (!(norm > 0) || !std::isfinite(norm))
                throw Error(ErrorCode::undefined_similarity,
                            "vector for '" + words_[static_cast<std::size_t>(r)] + "' is zero or non-finite");
            unit_.row(r) = raw_.row(r) / norm;
        }
        index_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (!index_.emplace(words_[i], static_cast<WordIndex>(i)).second)
                throw Error(ErrorCode::invalid_argument, "duplicate word '" + words_[i] + "'");
        fingerprint_ = lexiscope::fingerprint(words_, raw_);
    }

    explicit VectorSpace(Embeddings<Scalar> e) : VectorSpace(std::move(e.words), std::move(e.vectors)) {}

    std::size_t size() const noexcept { return words_.size(); }
    Eigen::Index dims() const noexcept { return unit_.cols(); }

    const std::string& word(WordIndex i) const { return words_[static_cast<std::size_t>(i)]; }
    const std::vector<std::string>& words() const noexcept { return words_; }

    std::optional<WordIndex> find(std::string_view w) const {
        auto it = index_.find(std::string(w));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Exact match first, then the lowercased and normalized forms.
    std::optional<WordIndex> resolve(std::string_view w) const {
        if (auto i = find(w)) return i;
        const std::string lower = to_lower_ascii(w);
        if (auto i = find(lower)) return i;
        return find(text::normalize_word(lower));
    }

    auto unit(WordIndex i) const { return unit_.row(i); }
    auto raw(WordIndex i) const { return raw_.row(i); }
    const RowMatrix<Scalar>& unit_vectors() const noexcept { return unit_; }

    /// FNV-1a over the words and raw values; identifies the space in provenance records.
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    std::vector<std::string> words_;
    RowMatrix<Scalar> raw_;
    RowMatrix<Scalar> unit_;
    std::unordered_map<std::string, WordIndex> index_;
    std::uint64_t fingerprint_ = 0;
};

template <class Scalar>
struct CategoryQuery {
    Vector<Scalar> vector;
    std::vector<std::string> resolved;  // terms that contributed a vector
    std::vector<std::string> missing;   // out-of-vocabulary terms
};

/// Splits a category name into its tokens ("social media" -> social, media).
inline std::vector<std::string> name_terms(std::string_view name) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : name) {
        if (c == ' ' || c == '_' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

/// v(name) + sum of v(seed) over the terms found in the space. The name may be
/// empty. Repeated terms count once. Throws empty_query if nothing resolves.
template <class Scalar>
CategoryQuery<Scalar> query_vector(std::string_view name, const std::vector<std::string>& seeds,
                                   const VectorSpace<Scalar>& space, SeedVectors mode = SeedVectors::unit) {
    CategoryQuery<Scalar> q;
    q.vector = Vector<Scalar>::Zero(space.dims());
    std::unordered_set<WordIndex> used;
    auto add = [&](const std::string& term) {
        const auto idx = space.resolve(term);
        if (!idx) {
            q.missing.push_back(term);
            return;
        }
        if (!used.insert(*idx).second) return;
        q.resolved.push_back(term);
        if (mode == SeedVectors::unit) q.vector += space.unit(*idx).transpose();
        else q.vector += space.raw(*idx).transpose();
    };
    for (const auto& t : name_terms(name)) add(t);
    for (const auto& s : seeds) add(s);
    if (q.resolved.empty()) {
        std::string list;
        for (const auto& m : q.missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::empty_query, "no query term is in the vocabulary (" + list + ")");
    }
    return q;
}

/// Cosine of every word in the space against `query`.
template <class Scalar, class Derived>
Vector<Scalar> similarities(const VectorSpace<Scalar>& space, const Eigen::MatrixBase<Derived>& query) {
    if (query.size() != space.dims()) throw Error(ErrorCode::invalid_argument, "query has wrong dimensionality");
    const Scalar norm = query.norm();
    if (!(norm > 0)) throw Error(ErrorCode::undefined_similarity, "query vector is zero");
    return space.unit_vectors() * (query / norm);
}

/// Orders indices by similarity descending, ties by index ascending.
template <class Scalar>
struct RankBefore {
    const Vector<Scalar>* scores;
    bool operator()(WordIndex a, WordIndex b) const {
        const Scalar sa = (*scores)(a), sb = (*scores)(b);
        if (sa != sb) return sa > sb;
        return a < b;
    }
};

/// The k most similar words outside `exclude`, best first.
template <class Scalar, class Derived>
std::vector<ScoredTerm> nearest(const VectorSpace<Scalar>& space, const Eigen::MatrixBase<Derived>& query,
                                std::size_t k, const std::unordered_set<std::string>& exclude = {}) {
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    const Vector<Scalar> scores = similarities(space, query);
    std::vector<WordIndex> candidates;
    candidates.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i)
        if (!exclude.count(space.words()[i])) candidates.push_back(static_cast<WordIndex>(i));
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      RankBefore<Scalar>{&scores});
    std::vector<ScoredTerm> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({space.word(candidates[i]), static_cast<double>(scores(candidates[i]))});
    return out;
}

}  // namespace lexiscope
