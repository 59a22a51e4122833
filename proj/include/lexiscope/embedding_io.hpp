#pragma once

#include "lexiscope/error.hpp"
#include "lexiscope/format.hpp"
#include "lexiscope/sgns.hpp"

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace lexiscope {

/// A word list with one vector per word, as stored in an interchange file.
template <class Scalar>
struct Embeddings {
    std::vector<std::string> words;
    RowMatrix<Scalar> vectors;
};

/// Text interchange format: "n h" on the first line, then n lines of
/// "word v1 ... vh". Values use the shortest round-trip decimal form.
template <class Scalar, class Derived>
std::string serialize_embeddings(const std::vector<std::string>& words, const Eigen::MatrixBase<Derived>& vectors) {
    if (static_cast<Eigen::Index>(words.size()) != vectors.rows())
        throw Error(ErrorCode::invalid_argument, "word count does not match matrix rows");
    std::string out = std::to_string(vectors.rows()) + " " + std::to_string(vectors.cols()) + "\n";
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
        out += words[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
            out.push_back(' ');
            out += format_number(static_cast<Scalar>(vectors(r, c)));
        }
        out.push_back('\n');
    }
    return out;
}

template <class Scalar>
void save_embeddings(const std::string& path, const std::vector<std::string>& words, const RowMatrix<Scalar>& vectors) {
    write_file(path, serialize_embeddings<Scalar>(words, vectors));
}

template <class Scalar>
Embeddings<Scalar> parse_embeddings(std::string_view text) {
    auto fail = [](std::size_t line, const std::string& what) -> Error {
        return Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
    };
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        return true;
    };

    std::string_view line;
    if (!next_line(line)) throw fail(1, "missing header \"n h\"");
    const auto header = split_whitespace(line);
    if (header.size() != 2) throw fail(1, "malformed header, expected \"n h\"");
    const auto n = parse_number<long long>(header[0]);
    const auto h = parse_number<long long>(header[1]);
    if (!n || !h || *n < 0 || *h < 1) throw fail(1, "malformed header, expected \"n h\"");

    Embeddings<Scalar> out;
    out.words.reserve(static_cast<std::size_t>(*n));
    out.vectors.resize(*n, *h);
    std::unordered_set<std::string> seen;
    Eigen::Index row = 0;
    while (row < *n && next_line(line)) {
        const auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (static_cast<long long>(fields.size()) - 1 != *h)
            throw fail(line_no, "row " + std::to_string(row + 1) + " ('" + std::string(fields[0]) + "') has " +
                                    std::to_string(fields.size() - 1) + " values, expected " + std::to_string(*h));
        std::string word(fields[0]);
        if (!seen.insert(word).second) throw fail(line_no, "duplicate word '" + word + "'");
        for (long long c = 0; c < *h; ++c) {
            const auto v = parse_number<Scalar>(fields[static_cast<std::size_t>(c) + 1]);
            if (!v || !std::isfinite(*v))
                throw fail(line_no, "row " + std::to_string(row + 1) + ": bad value '" +
                                        std::string(fields[static_cast<std::size_t>(c) + 1]) + "'");
            out.vectors(row, static_cast<Eigen::Index>(c)) = *v;
        }
        out.words.push_back(std::move(word));
        ++row;
    }
    if (row != *n)
        throw fail(line_no, "header declares " + std::to_string(*n) + " rows but file has " + std::to_string(row));
    while (next_line(line))
        if (!split_whitespace(line).empty()) throw fail(line_no, "unexpected data after the declared rows");
    return out;
}

template <class Scalar>
Embeddings<Scalar> load_embeddings(const std::string& path) {
    try {
        return parse_embeddings<Scalar>(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::parse_error) throw Error(ErrorCode::parse_error, path + ": " + e.what());
        throw;
    }
}

/// 64-bit FNV-1a over words and the exact bit patterns of the values.
template <class Scalar>
std::uint64_t fingerprint(const std::vector<std::string>& words, const RowMatrix<Scalar>& vectors) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001b3ULL;
        }
    };
    for (const auto& w : words) {
        mix(w.data(), w.size());
        mix("\0", 1);
    }
    for (Eigen::Index r = 0; r < vectors.rows(); ++r)
        for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
            const double v = static_cast<double>(vectors(r, c));
            mix(&v, sizeof v);
        }
    return hash;
}

}  // namespace lexiscope
