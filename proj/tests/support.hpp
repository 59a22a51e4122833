#pragma once

#include "lexiscope/lexicon.hpp"
#include "lexiscope/rng.hpp"

#include <filesystem>
#include <string>

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        lexiscope::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
        path_ = std::filesystem::temp_directory_path() / ("lexiscope-" + tag + "-" + std::to_string(rng.next() % 1000000));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// n random Gaussian vectors named w0, w1, ...
inline lexiscope::Space random_space(std::size_t n, Eigen::Index dims, lexiscope::Rng& rng) {
    std::vector<std::string> words;
    lexiscope::RowMatrix<double> m(static_cast<Eigen::Index>(n), dims);
    for (std::size_t i = 0; i < n; ++i) {
        words.push_back("w" + std::to_string(i));
        for (Eigen::Index c = 0; c < dims; ++c) m(static_cast<Eigen::Index>(i), c) = rng.normal();
    }
    return lexiscope::Space(std::move(words), std::move(m));
}

/// A category with the given members, all scored 1 and listed in order.
inline lexiscope::Category make_category(const std::string& name, const std::vector<std::string>& words) {
    lexiscope::Category c;
    c.spec.name = name;
    c.spec.seeds = {words.empty() ? name : words.front()};
    c.spec.max_terms = std::max<std::size_t>(words.size(), 1);
    for (const auto& w : words) c.members.push_back({w, 1.0});
    c.provenance = {"1970-01-01T00:00:00Z", "0000000000000000"};
    return c;
}

}  // namespace testing
