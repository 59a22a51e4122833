#include "lexiscope/trainer.hpp"
#include "lexiscope/vsm.hpp"

#include <doctest.h>

#include <cmath>

using namespace lexiscope;

namespace {

Corpus two_cliques(std::size_t sentences_per_clique, std::size_t length, Rng& rng) {
    const std::vector<std::string> left{"a", "b", "c"}, right{"x", "y", "z"};
    Corpus corpus;
    for (std::size_t s = 0; s < 2 * sentences_per_clique; ++s) {
        const auto& clique = s % 2 == 0 ? left : right;
        std::vector<std::string> sentence;
        for (std::size_t t = 0; t < length; ++t) sentence.push_back(clique[rng.below(3)]);
        corpus.push_back(std::move(sentence));
    }
    return corpus;
}

TrainingConfig small_config() {
    TrainingConfig c;
    c.dims = 16;
    c.window = 3;
    c.min_count = 1;
    c.negative_samples = 5;
    c.epochs = 5;
    c.downsample_threshold.reset();
    c.stopword_logprob.reset();
    return c;
}

double clique_gap(const TrainedModel<double>& model) {
    const auto& v = model.vocabulary;
    const auto& in = model.embeddings.input;
    auto row = [&](const char* w) { return in.row(*v.find(w)); };
    const char* left[] = {"a", "b", "c"};
    const char* right[] = {"x", "y", "z"};
    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            intra += cosine(row(left[i]), row(left[j])) + cosine(row(right[i]), row(right[j]));
            n_intra += 2;
        }
    for (const char* l : left)
        for (const char* r : right) {
            inter += cosine(row(l), row(r));
            ++n_inter;
        }
    return intra / n_intra - inter / n_inter;
}

}  // namespace

TEST_CASE("two cliques separate") {
    Rng rng(2);
    const auto corpus = two_cliques(1000, 8, rng);
    auto config = small_config();
    config.epochs = 3;
    const auto model = train<double>(corpus, config);
    CHECK(model.vocabulary.size() == 6);
    CHECK(clique_gap(model) >= 0.3);
    CHECK(model.embeddings.input.allFinite());
    for (Eigen::Index r = 0; r < model.embeddings.rows(); ++r) CHECK(model.embeddings.input.row(r).norm() > 0);
}

TEST_CASE("zero epochs leaves the initialization") {
    Rng rng(2);
    const auto corpus = two_cliques(20, 5, rng);
    auto config = small_config();
    config.epochs = 0;
    config.rng_seed = 77;
    const auto model = train<double>(corpus, config);
    Rng init_rng(77);
    const auto init = initialize_embeddings<double>(6, config.dims, init_rng);
    CHECK(model.embeddings.input == init.input);
    CHECK(model.embeddings.output == init.output);
    CHECK(model.epoch_loss.empty());
}

TEST_CASE("single-threaded training is deterministic") {
    Rng rng(8);
    const auto corpus = two_cliques(100, 6, rng);
    auto config = small_config();
    config.rng_seed = 123;
    const auto a = train<double>(corpus, config);
    const auto b = train<double>(corpus, config);
    CHECK(a.embeddings.input == b.embeddings.input);
    CHECK(a.embeddings.output == b.embeddings.output);
    CHECK(a.epoch_loss == b.epoch_loss);
    config.rng_seed = 124;
    const auto c = train<double>(corpus, config);
    CHECK_FALSE(a.embeddings.input == c.embeddings.input);
}

TEST_CASE("epoch loss does not rise over the first five epochs") {
    Rng rng(13);
    Corpus corpus = two_cliques(300, 10, rng);
    // a few shared words make the task non-trivial
    for (std::size_t i = 0; i < corpus.size(); i += 7) corpus[i].push_back("m" + std::to_string(i % 5));
    auto config = small_config();
    config.learning_rate = 0.025;
    const auto model = train<double>(corpus, config);
    REQUIRE(model.epoch_loss.size() == 5);
    for (std::size_t e = 1; e < model.epoch_loss.size(); ++e) {
        CAPTURE(e);
        CHECK(model.epoch_loss[e] <= model.epoch_loss[e - 1] * 1.05);
    }
}

TEST_CASE("hogwild training runs and learns") {
    Rng rng(2);
    const auto corpus = two_cliques(1000, 8, rng);
    auto config = small_config();
    config.threads = 4;
    config.epochs = 3;
    const auto model = train<double>(corpus, config);
    CHECK(model.embeddings.input.allFinite());
    CHECK(clique_gap(model) >= 0.3);
}

TEST_CASE("config validation") {
    auto config = small_config();
    config.dims = 0;
    CHECK_THROWS_AS(config.validate(), Error);
    config = small_config();
    config.learning_rate = 0;
    CHECK_THROWS_AS(config.validate(), Error);
    config = small_config();
    config.negative_samples = 0;
    CHECK_THROWS_AS(config.validate(), Error);
    config = small_config();
    config.window = 0;
    CHECK_THROWS_AS(config.validate(), Error);
}

TEST_CASE("filtering everything is an empty-vocabulary error") {
    auto config = small_config();
    config.min_count = 100;
    try {
        train<double>(Corpus{{"a", "b"}}, config);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_vocabulary);
    }
}

TEST_CASE("downsampling keeps every word at or below the threshold") {
    CHECK(keep_probability(1, 1'000'000, 1e-5) == 1.0);
    CHECK(keep_probability(10, 1'000'000, 1e-5) == 1.0);
    CHECK(keep_probability(40, 1'000'000, 1e-5) == doctest::Approx(0.5));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t total = 1 + rng.below(1'000'000);
        const std::uint64_t count = 1 + rng.below(total);
        const double t = std::pow(10.0, -rng.uniform(1, 6));
        const double p = keep_probability(count, total, t);
        CHECK(p > 0);
        CHECK(p <= 1);
        if (static_cast<double>(count) / static_cast<double>(total) <= t) CHECK(p == 1.0);
    }
}

TEST_CASE("noise distribution follows count^0.75") {
    Vocabulary v({{"a", 81}, {"b", 16}, {"c", 1}}, 98);
    NoiseSampler noise(v);
    const double z = 27.0 + 8.0 + 1.0;
    CHECK(noise.probability(0) == doctest::Approx(27.0 / z));
    CHECK(noise.probability(1) == doctest::Approx(8.0 / z));
    CHECK(noise.probability(2) == doctest::Approx(1.0 / z));
    Rng rng(5);
    std::vector<int> hits(3);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) ++hits[static_cast<std::size_t>(noise.sample(rng))];
    for (int i = 0; i < 3; ++i) CHECK(hits[i] / double(draws) == doctest::Approx(noise.probability(i)).epsilon(0.03));
}
