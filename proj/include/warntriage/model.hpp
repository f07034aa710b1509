#pragma once

#include "warntriage/encoder.hpp"
#include "warntriage/error.hpp"
#include "warntriage/rng.hpp"
#include "warntriage/warning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace warntriage {

enum class ClassLabel { FalseWarning = 0, UTB = 1, LTB = 2, VTB = 3 };

inline constexpr std::size_t kNumClasses = 4;

inline std::string_view to_string(ClassLabel c) {
    switch (c) {
    case ClassLabel::FalseWarning: return "FalseWarning";
    case ClassLabel::UTB: return "UTB";
    case ClassLabel::LTB: return "LTB";
    case ClassLabel::VTB: return "VTB";
    }
    return "";
}

inline std::optional<ClassLabel> parse_class_label(std::string_view s) {
    for (int i = 0; i < 4; ++i)
        if (to_string(static_cast<ClassLabel>(i)) == s) return static_cast<ClassLabel>(i);
    return std::nullopt;
}

inline int base_score(ClassLabel c) { return static_cast<int>(c); }

struct Hyperparams {
    std::size_t hidden = 128;
    double learning_rate = 0.05;
    int epochs = 10;
    int batch_size = 32;
    int oversample = 10;
    double init_scale = 0.5; // shared layer weights ~ U(-s, s)

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Affine class head over the hidden layer; weights are hidden x classes, row-major.
struct Head {
    std::size_t classes = 0;
    std::vector<double> w;
    std::vector<double> b;

    bool empty() const { return classes == 0; }
    friend bool operator==(const Head&, const Head&) = default;
};

struct ModelParams {
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::uint64_t seed = 0;
    Hyperparams hp;
    std::vector<double> w1; // dim x hidden, row-major
    std::vector<double> b1; // hidden
    Head binary;
    Head multiclass;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct BinaryExample {
    SparseVector x;
    bool actionable = false;
};

struct MulticlassExample {
    SparseVector x;
    ClassLabel label = ClassLabel::FalseWarning;
    int weak_score = 0; // cm + cc
};

/// One term of a training objective: weight * cross-entropy(label).
struct WeightedExample {
    const SparseVector* x = nullptr;
    int label = 0;
    double weight = 1.0;
};

namespace detail {

inline Head init_head(std::size_t hidden, std::size_t classes, Rng& rng) {
    Head h;
    h.classes = classes;
    double a = std::sqrt(6.0 / static_cast<double>(hidden + classes));
    h.w.resize(hidden * classes);
    for (auto& v : h.w) v = rng.uniform(-a, a);
    h.b.assign(classes, 0.0);
    return h;
}

struct Forward {
    std::vector<double> z1;
    std::vector<double> h;
    std::vector<double> probs;
};

inline Forward forward(const ModelParams& p, const Head& head, const SparseVector& x) {
    Forward f;
    f.z1 = p.b1;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
        const double xv = x.value[k];
        const double* row = &p.w1[static_cast<std::size_t>(x.index[k]) * p.hidden];
        for (std::size_t j = 0; j < p.hidden; ++j) f.z1[j] += xv * row[j];
    }
    f.h.resize(p.hidden);
    for (std::size_t j = 0; j < p.hidden; ++j) f.h[j] = f.z1[j] > 0.0 ? f.z1[j] : 0.0;

    std::vector<double> logits = head.b;
    for (std::size_t j = 0; j < p.hidden; ++j) {
        if (f.h[j] == 0.0) continue;
        const double* row = &head.w[j * head.classes];
        for (std::size_t c = 0; c < head.classes; ++c) logits[c] += f.h[j] * row[c];
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    f.probs.resize(head.classes);
    for (std::size_t c = 0; c < head.classes; ++c) sum += f.probs[c] = std::exp(logits[c] - mx);
    for (auto& v : f.probs) v /= sum;
    return f;
}

inline double cross_entropy(const std::vector<double>& probs, int label) {
    return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300));
}

} // namespace detail

/// Accumulated gradient of scale * sum(weight * CE) over a batch. The shared
/// matrix gradient is kept as (input, dz1) outer-product terms.
struct BatchGradient {
    std::vector<double> b1;
    std::vector<double> head_w;
    std::vector<double> head_b;
    std::vector<std::pair<const SparseVector*, std::vector<double>>> w1_terms;
    double loss = 0.0;

    BatchGradient(std::size_t hidden, std::size_t classes)
        : b1(hidden, 0.0), head_w(hidden * classes, 0.0), head_b(classes, 0.0) {}

    std::vector<double> dense_w1(std::size_t dim, std::size_t hidden) const {
        std::vector<double> g(dim * hidden, 0.0);
        for (const auto& [x, dz] : w1_terms)
            for (std::size_t k = 0; k < x->nnz(); ++k)
                for (std::size_t j = 0; j < hidden; ++j) g[x->index[k] * hidden + j] += x->value[k] * dz[j];
        return g;
    }
};

/// Adds scale * weight * d CE / d params for one example into g.
inline void backprop(const ModelParams& p, const Head& head, const WeightedExample& ex, double scale,
                     BatchGradient& g) {
    auto f = detail::forward(p, head, *ex.x);
    const double s = scale * ex.weight;
    g.loss += s * detail::cross_entropy(f.probs, ex.label);

    std::vector<double> dlogits(head.classes);
    for (std::size_t c = 0; c < head.classes; ++c)
        dlogits[c] = s * (f.probs[c] - (static_cast<int>(c) == ex.label ? 1.0 : 0.0));

    std::vector<double> dz1(p.hidden, 0.0);
    for (std::size_t j = 0; j < p.hidden; ++j) {
        const double* row = &head.w[j * head.classes];
        double* grow = &g.head_w[j * head.classes];
        double dh = 0.0;
        for (std::size_t c = 0; c < head.classes; ++c) {
            grow[c] += f.h[j] * dlogits[c];
            dh += row[c] * dlogits[c];
        }
        dz1[j] = f.z1[j] > 0.0 ? dh : 0.0;
        g.b1[j] += dz1[j];
    }
    for (std::size_t c = 0; c < head.classes; ++c) g.head_b[c] += dlogits[c];
    g.w1_terms.emplace_back(ex.x, std::move(dz1));
}

/// weight * CE of one example, no gradient.
inline double example_loss(const ModelParams& p, const Head& head, const WeightedExample& ex) {
    return ex.weight * detail::cross_entropy(detail::forward(p, head, *ex.x).probs, ex.label);
}

/// Mean weighted loss over a set (the training objective).
inline double mean_loss(const ModelParams& p, const Head& head, std::span<const WeightedExample> set) {
    if (set.empty()) return 0.0;
    double s = 0.0;
    for (const auto& ex : set) s += example_loss(p, head, ex);
    return s / static_cast<double>(set.size());
}

inline void apply_gradient(ModelParams& p, Head& head, const BatchGradient& g, double lr) {
    for (std::size_t j = 0; j < p.hidden; ++j) p.b1[j] -= lr * g.b1[j];
    for (std::size_t i = 0; i < head.w.size(); ++i) head.w[i] -= lr * g.head_w[i];
    for (std::size_t c = 0; c < head.classes; ++c) head.b[c] -= lr * g.head_b[c];
    for (const auto& [x, dz] : g.w1_terms)
        for (std::size_t k = 0; k < x->nnz(); ++k) {
            double* row = &p.w1[static_cast<std::size_t>(x->index[k]) * p.hidden];
            const double xv = lr * x->value[k];
            for (std::size_t j = 0; j < p.hidden; ++j) row[j] -= xv * dz[j];
        }
}

/// Random shared layer plus a fresh binary head, both from `seed`.
inline ModelParams init_params(std::size_t dim, const Hyperparams& hp, std::uint64_t seed) {
    ModelParams p;
    p.dim = dim;
    p.hidden = hp.hidden;
    p.seed = seed;
    p.hp = hp;
    Rng rng(derive_seed(seed, 1));
    p.w1.resize(dim * hp.hidden);
    for (auto& v : p.w1) v = rng.uniform(-hp.init_scale, hp.init_scale);
    p.b1.assign(hp.hidden, 0.0);
    p.binary = detail::init_head(hp.hidden, 2, rng);
    return p;
}

/// Mini-batch gradient descent on mean(weight * CE) over `set`. Examples are
/// reshuffled each epoch from an RNG stream derived from (seed, tag).
inline void train_head(ModelParams& p, Head& head, std::vector<WeightedExample> set, std::uint64_t tag,
                       std::vector<double>* epoch_losses = nullptr) {
    Rng rng(derive_seed(p.seed, tag));
    const auto batch = static_cast<std::size_t>(std::max(1, p.hp.batch_size));
    for (int epoch = 0; epoch < p.hp.epochs; ++epoch) {
        rng.shuffle(set);
        for (std::size_t start = 0; start < set.size(); start += batch) {
            auto end = std::min(set.size(), start + batch);
            BatchGradient g(p.hidden, head.classes);
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto i = start; i < end; ++i) backprop(p, head, set[i], scale, g);
            apply_gradient(p, head, g, p.hp.learning_rate);
        }
        if (epoch_losses) epoch_losses->push_back(mean_loss(p, head, set));
    }
}

/// Stage one: actionable-vs-false classification with (binary) cross-entropy
/// on the natural class distribution.
inline ModelParams warmup_train(const std::vector<BinaryExample>& data, std::size_t dim, const Hyperparams& hp,
                                std::uint64_t seed, std::vector<double>* epoch_losses = nullptr) {
    bool pos = false, neg = false;
    for (const auto& e : data) (e.actionable ? pos : neg) = true;
    if (!pos || !neg) throw DegenerateData("warm-up needs both actionable and false warnings");
    for (const auto& e : data)
        if (!e.x.index.empty() && e.x.index.back() >= dim)
            throw DegenerateData("example feature index exceeds encoder dimension");

    auto p = init_params(dim, hp, seed);
    std::vector<WeightedExample> set;
    set.reserve(data.size());
    for (const auto& e : data) set.push_back({&e.x, e.actionable ? 1 : 0, 1.0});
    train_head(p, p.binary, std::move(set), 2, epoch_losses);
    return p;
}

/// Loss weight of a fine-tuning example: 1 + (cm+cc)/5 for actionable classes,
/// 1 for false warnings.
inline double sample_weight(ClassLabel label, int weak_score) {
    if (label == ClassLabel::FalseWarning) return 1.0;
    return 1.0 + static_cast<double>(weak_score) / 5.0;
}

/// Fine-tuning set: each actionable example repeated `factor` times.
inline std::vector<WeightedExample> oversample(const std::vector<MulticlassExample>& data, int factor) {
    std::vector<WeightedExample> out;
    for (const auto& e : data) {
        int copies = e.label == ClassLabel::FalseWarning ? 1 : std::max(1, factor);
        WeightedExample w{&e.x, static_cast<int>(e.label), sample_weight(e.label, e.weak_score)};
        for (int k = 0; k < copies; ++k) out.push_back(w);
    }
    return out;
}

/// Stage two: four-class weighted cross-entropy. The shared layer continues
/// from the warm-up parameters; the four-way head is freshly initialized.
inline ModelParams finetune_train(const std::vector<MulticlassExample>& data, const ModelParams& warm,
                                  std::vector<double>* epoch_losses = nullptr) {
    std::array<bool, kNumClasses> present{};
    for (const auto& e : data) present[static_cast<std::size_t>(e.label)] = true;
    for (std::size_t c = 0; c < kNumClasses; ++c)
        if (!present[c])
            throw DegenerateData("fine-tuning needs all four classes; missing " +
                                 std::string(to_string(static_cast<ClassLabel>(c))));

    ModelParams p = warm;
    Rng rng(derive_seed(p.seed, 3));
    p.multiclass = detail::init_head(p.hidden, kNumClasses, rng);
    train_head(p, p.multiclass, oversample(data, p.hp.oversample), 4, epoch_losses);
    return p;
}

using ClassProbs = std::array<double, kNumClasses>;

inline ClassProbs predict(const ModelParams& p, const SparseVector& x) {
    if (p.multiclass.empty()) throw ArtifactError("model has no fine-tuned head");
    auto f = detail::forward(p, p.multiclass, x);
    ClassProbs out{};
    std::copy(f.probs.begin(), f.probs.end(), out.begin());
    return out;
}

/// Probability of "actionable" from the warm-up head.
inline double predict_actionable(const ModelParams& p, const SparseVector& x) {
    if (p.binary.empty()) throw ArtifactError("model has no warm-up head");
    return detail::forward(p, p.binary, x).probs[1];
}

/// Argmax with ties resolved toward the higher class.
inline ClassLabel predicted_class(const ClassProbs& probs) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
        if (probs[c] >= probs[best]) best = c;
    return static_cast<ClassLabel>(best);
}

/// class + p for a predicted UTB/LTB/VTB, -p for a predicted false warning,
/// where p is the probability of the predicted class.
inline double ranking_score(const ClassProbs& probs) {
    auto c = predicted_class(probs);
    double p = probs[static_cast<std::size_t>(c)];
    return c == ClassLabel::FalseWarning ? -p : base_score(c) + p;
}

struct RankedItem {
    Digest identity = 0;
    double score = 0.0;
    ClassLabel predicted = ClassLabel::FalseWarning;
    double probability = 0.0;

    friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

using RankedList = std::vector<RankedItem>;

/// Sorts by score descending, then identity ascending.
inline void sort_ranked(RankedList& list) {
    std::sort(list.begin(), list.end(), [](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.identity < b.identity;
    });
}

struct RankInput {
    Digest identity = 0;
    SparseVector x;
};

inline RankedList rank(const ModelParams& p, const std::vector<RankInput>& items) {
    RankedList out;
    out.reserve(items.size());
    for (const auto& it : items) {
        auto probs = predict(p, it.x);
        auto c = predicted_class(probs);
        out.push_back({it.identity, ranking_score(probs), c, probs[static_cast<std::size_t>(c)]});
    }
    sort_ranked(out);
    return out;
}

} // namespace warntriage
