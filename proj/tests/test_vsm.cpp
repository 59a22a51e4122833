#include "lexiscope/vsm.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace lexiscope;

TEST_CASE("cosine examples") {
    Eigen::Vector2d a(1, 0), b(0, 1);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    Eigen::Vector3d x(1, 2, 3), y(4, 5, 6);
    // 32 / sqrt(14 * 77)
    CHECK(std::abs(cosine(x, y) - 0.974632) < 1e-6);
    CHECK(std::abs(cosine(x, y) - 32.0 / std::sqrt(14.0 * 77.0)) < 1e-15);
}

TEST_CASE("cosine errors") {
    Eigen::Vector2d zero(0, 0), a(1, 2);
    try {
        cosine(zero, a);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::undefined_similarity);
    }
    Eigen::VectorXd c(2), d(3);
    c << 1, 2;
    d << 1, 2, 3;
    CHECK_THROWS_AS(cosine(c, d), Error);
}

TEST_CASE("property: cosine symmetry, self-similarity and scale invariance") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto dims = static_cast<Eigen::Index>(rng.between(1, 12));
        Eigen::VectorXd a(dims), b(dims);
        for (Eigen::Index i = 0; i < dims; ++i) {
            a(i) = rng.normal();
            b(i) = rng.normal();
        }
        const double lambda = std::exp(rng.uniform(-5, 5));
        CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)).epsilon(1e-12));
        CHECK(cosine(Eigen::VectorXd(lambda * a), b) == doctest::Approx(cosine(a, b)).epsilon(1e-12));
        CHECK(std::abs(cosine(a, b)) <= 1 + 1e-12);
    }
}

TEST_CASE("rows are normalized and zero rows rejected") {
    RowMatrix<double> m(2, 2);
    m << 3, 4, 0, 2;
    Space space({"a", "b"}, m);
    CHECK(space.unit(0).norm() == doctest::Approx(1.0));
    CHECK(space.unit(0)(0) == doctest::Approx(0.6));
    CHECK(space.raw(0)(1) == 4.0);
    m(1, 1) = 0;
    CHECK_THROWS_AS(Space({"a", "b"}, m), Error);
    m(1, 1) = 1;
    CHECK_THROWS_AS(Space({"a", "a"}, m), Error);
}

TEST_CASE("resolve falls back to lowercase and normalized forms") {
    RowMatrix<double> m = RowMatrix<double>::Identity(3, 3);
    Space space({"kill", "Paris", "soldier"}, m);
    CHECK(space.resolve("kill") == 0);
    CHECK(space.resolve("KILL") == 0);
    CHECK(space.resolve("Killed") == 0);
    CHECK(space.resolve("Paris") == 1);
    CHECK(space.resolve("soldiers") == 2);
    CHECK_FALSE(space.resolve("paris"));
}

TEST_CASE("query vector sums the name and seeds") {
    RowMatrix<double> m(4, 2);
    m << 2, 0, 0, 3, 1, 1, -1, 0;
    Space space({"clothing", "shirt", "hat", "other"}, m);
    const auto q = query_vector<double>("clothing", {"shirt", "hat"}, space);
    const double s = 1 / std::sqrt(2.0);
    CHECK(q.vector(0) == doctest::Approx(1 + s));
    CHECK(q.vector(1) == doctest::Approx(1 + s));
    CHECK(q.resolved == std::vector<std::string>{"clothing", "shirt", "hat"});
    CHECK(q.missing.empty());

    const auto raw = query_vector<double>("clothing", {"shirt", "hat"}, space, SeedVectors::raw);
    CHECK(raw.vector(0) == doctest::Approx(3));
    CHECK(raw.vector(1) == doctest::Approx(4));

    const auto oov_name = query_vector<double>("garments", {"hat"}, space);
    CHECK(oov_name.vector(0) == doctest::Approx(s));
    CHECK(oov_name.missing == std::vector<std::string>{"garments"});

    const auto name_only = query_vector<double>("other", {}, space);
    CHECK(name_only.vector(0) == doctest::Approx(-1));

    const auto dup = query_vector<double>("hat", {"hat", "Hat"}, space);
    CHECK(dup.vector(0) == doctest::Approx(s));

    try {
        query_vector<double>("nothing", {"zz"}, space);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_query);
        CHECK(std::string(e.what()).find("zz") != std::string::npos);
    }
}

TEST_CASE("multiword names contribute each token") {
    RowMatrix<double> m(3, 2);
    m << 1, 0, 0, 1, 1, 1;
    Space space({"social", "media", "x"}, m);
    const auto q = query_vector<double>("social media", {}, space);
    CHECK(q.resolved == std::vector<std::string>{"social", "media"});
    CHECK(q.vector(0) == doctest::Approx(1));
    CHECK(q.vector(1) == doctest::Approx(1));
    CHECK(query_vector<double>("social_media", {}, space).resolved.size() == 2);
}

// Exhaustive oracle: cosine of every row against the query with the textbook formula.
static std::vector<ScoredTerm> brute_force(const Space& space, const RowMatrix<double>& raw, const Eigen::VectorXd& q,
                                           std::size_t k, const std::unordered_set<std::string>& exclude) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (exclude.count(space.words()[i])) continue;
        const Eigen::VectorXd row = raw.row(static_cast<Eigen::Index>(i)).transpose();
        all.push_back({row.dot(q) / (row.norm() * q.norm()), i});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<ScoredTerm> out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back({space.words()[all[i].second], all[i].first});
    return out;
}

TEST_CASE("nearest matches an exhaustive sort") {
    Rng rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng.below(200);
        const auto dims = static_cast<Eigen::Index>(rng.between(2, 10));
        RowMatrix<double> raw(static_cast<Eigen::Index>(n), dims);
        std::vector<std::string> words;
        for (std::size_t i = 0; i < n; ++i) {
            words.push_back("w" + std::to_string(i));
            for (Eigen::Index c = 0; c < dims; ++c) raw(static_cast<Eigen::Index>(i), c) = rng.normal();
        }
        Space space(words, raw);
        Eigen::VectorXd q(dims);
        for (Eigen::Index c = 0; c < dims; ++c) q(c) = rng.normal();
        std::unordered_set<std::string> exclude;
        for (int e = 0; e < 3; ++e) exclude.insert(words[rng.below(n)]);
        const std::size_t k = 1 + rng.below(n + 2);
        const auto got = nearest(space, q, k, exclude);
        const auto want = brute_force(space, raw, q, k, exclude);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].word == want[i].word);
            CHECK(got[i].similarity == doctest::Approx(want[i].similarity).epsilon(1e-12));
        }
    }
}

TEST_CASE("ties break by vocabulary index") {
    RowMatrix<double> m(5, 2);
    m << 1, 1, 2, 0, 1, 0, 0, 1, 5, 0;
    Space space({"a", "b", "c", "d", "e"}, m);
    const auto r = nearest(space, Eigen::Vector2d(1, 0), 5);
    std::vector<std::string> order;
    for (const auto& t : r) order.push_back(t.word);
    CHECK(order == std::vector<std::string>{"b", "c", "e", "a", "d"});
}

TEST_CASE("nearest edge cases") {
    RowMatrix<double> m(3, 2);
    m << 1, 0, 0.9, 0.1, 0, 1;
    Space space({"sad", "heartbroken", "happy"}, m);
    const auto one = nearest(space, space.raw(0).transpose(), 1, {"sad"});
    REQUIRE(one.size() == 1);
    CHECK(one[0].word == "heartbroken");
    CHECK(nearest(space, Eigen::Vector2d(1, 0), 10, {"sad"}).size() == 2);
    CHECK_THROWS_AS(nearest(space, Eigen::Vector2d(0, 0), 1), Error);
    CHECK_THROWS_AS(nearest(space, Eigen::Vector2d(1, 0), 0), Error);
}

TEST_CASE("property: scaling the query keeps the ranking") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto space = testing::random_space(100, 6, rng);
        Eigen::VectorXd q(6);
        for (int c = 0; c < 6; ++c) q(c) = rng.normal();
        const auto a = nearest(space, q, 100);
        const auto b = nearest(space, Eigen::VectorXd(q * std::exp(rng.uniform(-3, 3))), 100);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].word == b[i].word);
    }
}
