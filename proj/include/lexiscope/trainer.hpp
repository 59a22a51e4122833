#pragma once

#include "lexiscope/sgns.hpp"
#include "lexiscope/vocabulary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace lexiscope {

struct TrainingConfig {
    int dims = 150;
    int window = 5;
    WindowMode window_mode = WindowMode::dynamic;
    std::uint64_t min_count = 30;
    int negative_samples = 5;
    int epochs = 5;
    double learning_rate = 0.025;
    /// Frequent-word downsampling threshold t; nullopt disables downsampling.
    std::optional<double> downsample_threshold = 1e-5;
    std::optional<double> stopword_logprob = -8.0;
    std::uint64_t rng_seed = 1;
    /// 1 = deterministic. More threads run lock-free concurrent updates.
    int threads = 1;

    VocabularyOptions vocabulary_options() const { return {min_count, stopword_logprob}; }

    /// Throws invalid_argument naming the first offending field.
    void validate() const;
};

inline void TrainingConfig::validate() const {
    if (dims < 1) throw Error(ErrorCode::invalid_argument, "dims must be >= 1");
    if (window < 1) throw Error(ErrorCode::invalid_argument, "window must be >= 1");
    if (negative_samples < 1) throw Error(ErrorCode::invalid_argument, "negative_samples must be >= 1");
    if (epochs < 0) throw Error(ErrorCode::invalid_argument, "epochs must be >= 0");
    if (!(learning_rate > 0)) throw Error(ErrorCode::invalid_argument, "learning_rate must be > 0");
    if (downsample_threshold && !(*downsample_threshold > 0))
        throw Error(ErrorCode::invalid_argument, "downsample_threshold must be > 0");
    if (threads < 1) throw Error(ErrorCode::invalid_argument, "threads must be >= 1");
}

inline Vocabulary build_vocabulary(const Corpus& corpus, const TrainingConfig& config) {
    return build_vocabulary(corpus, config.vocabulary_options());
}

/// Draws word indices with probability proportional to count^0.75.
class NoiseSampler {
public:
    explicit NoiseSampler(const Vocabulary& vocab, double power = 0.75) {
        cumulative_.reserve(vocab.size());
        double acc = 0.0;
        for (const auto& e : vocab.entries()) {
            acc += std::pow(static_cast<double>(e.count), power);
            cumulative_.push_back(acc);
        }
    }

    WordIndex sample(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return static_cast<WordIndex>(it - cumulative_.begin());
    }

    double probability(WordIndex i) const {
        const double prev = i == 0 ? 0.0 : cumulative_[static_cast<std::size_t>(i) - 1];
        return (cumulative_[static_cast<std::size_t>(i)] - prev) / cumulative_.back();
    }

private:
    std::vector<double> cumulative_;
};

/// Probability of keeping an occurrence of a word with relative frequency f:
/// min(1, sqrt(t / f)). Words with f <= t are always kept.
inline double keep_probability(std::uint64_t count, std::uint64_t total, double threshold) {
    const double f = static_cast<double>(count) / static_cast<double>(total);
    if (f <= threshold) return 1.0;
    return std::sqrt(threshold / f);
}

template <class Scalar>
struct TrainedModel {
    Vocabulary vocabulary;
    EmbeddingMatrix<Scalar> embeddings;
    /// Mean loss per training pair, one entry per epoch.
    std::vector<double> epoch_loss;
};

namespace detail {

struct TrainingProgress {
    std::atomic<std::uint64_t> processed{0};
    std::uint64_t total = 1;
    double base_lr = 0.025;

    double current_lr() const {
        const double frac = static_cast<double>(processed.load(std::memory_order_relaxed)) /
                            static_cast<double>(total + 1);
        return base_lr * std::max(1.0 - frac, 1e-4);
    }
};

template <class Scalar>
double train_shard(std::span<const std::vector<WordIndex>> sentences, const Vocabulary& vocab,
                   const NoiseSampler& noise, const TrainingConfig& config, EmbeddingMatrix<Scalar>& model,
                   TrainingProgress& progress, Rng& rng, std::uint64_t& pair_count) {
    double loss_sum = 0.0;
    std::vector<WordIndex> kept;
    std::vector<WordIndex> negatives;
    negatives.reserve(static_cast<std::size_t>(config.negative_samples));
    for (const auto& sentence : sentences) {
        kept.clear();
        for (WordIndex w : sentence) {
            if (config.downsample_threshold) {
                const double p = keep_probability(vocab[w].count, vocab.total_tokens(), *config.downsample_threshold);
                if (p < 1.0 && rng.uniform() >= p) continue;
            }
            kept.push_back(w);
        }
        const auto lr = static_cast<Scalar>(progress.current_lr());
        for (const TrainingPair& pair : generate_pairs(kept, config.window, config.window_mode, rng)) {
            negatives.clear();
            for (int k = 0; k < config.negative_samples; ++k) {
                const WordIndex n = noise.sample(rng);
                if (n != pair.context) negatives.push_back(n);
            }
            loss_sum += static_cast<double>(sgns_step<Scalar>(pair, negatives, model, lr));
            ++pair_count;
        }
        progress.processed.fetch_add(sentence.size(), std::memory_order_relaxed);
    }
    return loss_sum;
}

}  // namespace detail

/// Trains skip-gram embeddings with negative sampling. With threads == 1 the
/// result is a pure function of (corpus, config).
template <class Scalar = double>
TrainedModel<Scalar> train(const Corpus& corpus, const TrainingConfig& config) {
    config.validate();
    TrainedModel<Scalar> result;
    result.vocabulary = build_vocabulary(corpus, config);
    const Vocabulary& vocab = result.vocabulary;
    if (vocab.empty()) throw Error(ErrorCode::empty_vocabulary, "no word survives min_count and stopword filtering");

    Rng rng(config.rng_seed);
    result.embeddings = initialize_embeddings<Scalar>(static_cast<Eigen::Index>(vocab.size()), config.dims, rng);

    std::vector<std::vector<WordIndex>> encoded;
    encoded.reserve(corpus.size());
    std::uint64_t train_words = 0;
    for (const auto& sentence : corpus) {
        encoded.push_back(vocab.encode(sentence));
        train_words += encoded.back().size();
    }

    const NoiseSampler noise(vocab);
    detail::TrainingProgress progress;
    progress.total = train_words * static_cast<std::uint64_t>(config.epochs);
    progress.base_lr = config.learning_rate;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::uint64_t pairs = 0;
        if (config.threads == 1) {
            loss_sum = detail::train_shard<Scalar>(encoded, vocab, noise, config, result.embeddings, progress, rng, pairs);
        } else {
            // Hogwild: shards update the shared matrices without locks.
            const auto t = static_cast<std::size_t>(config.threads);
            std::vector<double> losses(t, 0.0);
            std::vector<std::uint64_t> counts(t, 0);
            std::vector<std::exception_ptr> failures(t);
            std::vector<std::thread> workers;
            const std::size_t chunk = (encoded.size() + t - 1) / t;
            for (std::size_t i = 0; i < t; ++i) {
                const std::size_t lo = std::min(encoded.size(), i * chunk);
                const std::size_t hi = std::min(encoded.size(), lo + chunk);
                workers.emplace_back([&, i, lo, hi] {
                    Rng local(config.rng_seed ^ (0x9e3779b97f4a7c15ULL * (i + 1) + static_cast<std::uint64_t>(epoch)));
                    std::span<const std::vector<WordIndex>> shard(encoded.data() + lo, hi - lo);
                    try {
                        losses[i] = detail::train_shard<Scalar>(shard, vocab, noise, config, result.embeddings,
                                                                progress, local, counts[i]);
                    } catch (...) {
                        failures[i] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (auto& f : failures)
                if (f) std::rethrow_exception(f);
            for (std::size_t i = 0; i < t; ++i) {
                loss_sum += losses[i];
                pairs += counts[i];
            }
        }
        result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
    }
    return result;
}

}  // namespace lexiscope
