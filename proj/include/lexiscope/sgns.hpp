#pragma once

#include "lexiscope/error.hpp"
#include "lexiscope/rng.hpp"
#include "lexiscope/vocabulary.hpp"

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <vector>

namespace lexiscope {

template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Word vectors (input) and context weights (output), one row per vocabulary word.
template <class Scalar>
struct EmbeddingMatrix {
    RowMatrix<Scalar> input;
    RowMatrix<Scalar> output;

    Eigen::Index rows() const { return input.rows(); }
    Eigen::Index dims() const { return input.cols(); }
};

/// Input rows uniform in [-0.5/h, 0.5/h], output rows zero.
template <class Scalar>
EmbeddingMatrix<Scalar> initialize_embeddings(Eigen::Index rows, Eigen::Index dims, Rng& rng) {
    EmbeddingMatrix<Scalar> m;
    m.input.resize(rows, dims);
    const double half = 0.5 / static_cast<double>(dims);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < dims; ++c) m.input(r, c) = static_cast<Scalar>(rng.uniform(-half, half));
    m.output = RowMatrix<Scalar>::Zero(rows, dims);
    return m;
}

struct TrainingPair {
    WordIndex center;
    WordIndex context;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class WindowMode { dynamic, fixed };

/// Skip-gram pairs over one document. With WindowMode::dynamic each center draws
/// its radius uniformly from [1, window]; fixed mode always uses `window` and
/// consumes no randomness. Negative entries mark out-of-vocabulary positions:
/// they occupy a slot but never appear in a pair.
inline std::vector<TrainingPair> generate_pairs(std::span<const WordIndex> document, int window, WindowMode mode,
                                                Rng& rng) {
    if (window < 1) throw Error(ErrorCode::invalid_argument, "window must be >= 1");
    std::vector<TrainingPair> pairs;
    const auto n = static_cast<std::ptrdiff_t>(document.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (document[i] < 0) continue;
        const std::ptrdiff_t b = mode == WindowMode::dynamic ? rng.between(1, window) : window;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - b);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + b);
        for (std::ptrdiff_t j = lo; j <= hi; ++j) {
            if (j == i || document[j] < 0) continue;
            pairs.push_back({document[i], document[j]});
        }
    }
    return pairs;
}

template <class Scalar>
Scalar sigmoid(Scalar x) {
    return x >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-x)) : std::exp(x) / (Scalar(1) + std::exp(x));
}

/// ln(sigmoid(x)) without overflow for large |x|.
template <class Scalar>
Scalar log_sigmoid(Scalar x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Loss -ln s(w.c) - sum_n ln s(-w.n) and its gradient. Row 0 of `outputs` is
/// the gradient for the context row, row k+1 for negatives[k].
template <class Scalar>
struct SgnsGradient {
    Scalar loss{};
    Vector<Scalar> center;
    RowMatrix<Scalar> outputs;
};

template <class Scalar>
SgnsGradient<Scalar> sgns_gradient(const EmbeddingMatrix<Scalar>& model, TrainingPair pair,
                                   std::span<const WordIndex> negatives) {
    const auto w = model.input.row(pair.center);
    SgnsGradient<Scalar> g;
    g.center = Vector<Scalar>::Zero(model.dims());
    g.outputs.resize(static_cast<Eigen::Index>(negatives.size()) + 1, model.dims());

    const Scalar pos = w.dot(model.output.row(pair.context));
    g.loss = -log_sigmoid(pos);
    const Scalar coeff_pos = sigmoid(pos) - Scalar(1);
    g.center += coeff_pos * model.output.row(pair.context).transpose();
    g.outputs.row(0) = coeff_pos * w;

    for (std::size_t k = 0; k < negatives.size(); ++k) {
        const Scalar neg = w.dot(model.output.row(negatives[k]));
        g.loss -= log_sigmoid(-neg);
        const Scalar coeff = sigmoid(neg);
        g.center += coeff * model.output.row(negatives[k]).transpose();
        g.outputs.row(static_cast<Eigen::Index>(k) + 1) = coeff * w;
    }
    return g;
}

/// Loss only; the finite-difference oracle's objective.
template <class Scalar>
Scalar sgns_loss(const EmbeddingMatrix<Scalar>& model, TrainingPair pair, std::span<const WordIndex> negatives) {
    const auto w = model.input.row(pair.center);
    Scalar loss = -log_sigmoid(Scalar(w.dot(model.output.row(pair.context))));
    for (WordIndex n : negatives) loss -= log_sigmoid(Scalar(-w.dot(model.output.row(n))));
    return loss;
}

/// One gradient-descent step on a (center, context) pair and its negatives.
/// All gradients are taken at the pre-step parameters; repeated output rows
/// accumulate. Returns the pre-step loss.
template <class Scalar>
Scalar sgns_step(TrainingPair pair, std::span<const WordIndex> negatives, EmbeddingMatrix<Scalar>& model, Scalar lr) {
    auto w = model.input.row(pair.center);

    // coefficients first so every dot product sees the old output rows
    std::vector<Scalar> coeff(negatives.size() + 1);

    const Scalar pos = w.dot(model.output.row(pair.context));
    Scalar loss = -log_sigmoid(pos);
    coeff[0] = sigmoid(pos) - Scalar(1);
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> grad_w = coeff[0] * model.output.row(pair.context);
    for (std::size_t k = 0; k < negatives.size(); ++k) {
        const auto row = model.output.row(negatives[k]);
        const Scalar neg = w.dot(row);
        loss -= log_sigmoid(-neg);
        coeff[k + 1] = sigmoid(neg);
        grad_w += coeff[k + 1] * row;
    }
    if (!std::isfinite(loss)) throw Error(ErrorCode::training_divergence, "non-finite skip-gram loss");

    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> w_old = w;
    model.output.row(pair.context) -= (lr * coeff[0]) * w_old;
    for (std::size_t k = 0; k < negatives.size(); ++k) model.output.row(negatives[k]) -= (lr * coeff[k + 1]) * w_old;
    model.input.row(pair.center) -= lr * grad_w;
    return loss;
}

}  // namespace lexiscope
