#pragma once

#include "warntriage/error.hpp"
#include "warntriage/model.hpp"
#include "warntriage/rng.hpp"
#include "warntriage/warning.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace warntriage {

/// nDCG over the first k positions of a ranked gain list: sum of
/// gain_i / log2(i + 1), divided by the same sum for the gains sorted
/// descending. Zero when no gain is positive.
inline double ndcg_at_k(std::span<const double> gains, std::size_t k) {
    auto dcg = [k](std::span<const double> g) {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(k, g.size()); ++i) s += g[i] / std::log2(static_cast<double>(i) + 2.0);
        return s;
    };
    std::vector<double> ideal(gains.begin(), gains.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = dcg(ideal);
    if (idcg <= 0.0) return 0.0;
    return std::min(1.0, dcg(gains) / idcg);
}

/// 1 / (1-based rank of the first relevant item), or 0 without one.
inline double reciprocal_rank(const std::vector<bool>& relevant) {
    for (std::size_t i = 0; i < relevant.size(); ++i)
        if (relevant[i]) return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

inline double mrr(const std::vector<std::vector<bool>>& lists) {
    if (lists.empty()) return 0.0;
    double s = 0.0;
    for (const auto& l : lists) s += reciprocal_rank(l);
    return std::min(1.0, s / static_cast<double>(lists.size()));
}

/// ceil(k% of n), robust to k * n / 100 landing a hair above an integer.
inline std::size_t top_count(std::size_t n, double k_percent) {
    double exact = k_percent * static_cast<double>(n) / 100.0;
    auto top = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::min(top, n);
}

/// Share of the true AWHBs found in the top ceil(k% * N) positions. A list
/// with no true AWHB has nothing left to recall and scores 1.
inline double recall_at_percent(const std::vector<bool>& relevant, double k_percent) {
    if (!(k_percent > 0.0 && k_percent <= 100.0)) throw std::invalid_argument("k_percent must be in (0, 100]");
    auto total = static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
    if (total == 0) return 1.0;
    auto top = top_count(relevant.size(), k_percent);
    auto hit = static_cast<std::size_t>(std::count(relevant.begin(), relevant.begin() + static_cast<long>(top), true));
    return static_cast<double>(hit) / static_cast<double>(total);
}

inline double recall_at_percent(const std::vector<Digest>& ranked, const std::set<Digest>& truth,
                                double k_percent) {
    std::vector<bool> rel;
    rel.reserve(ranked.size());
    for (auto id : ranked) rel.push_back(truth.count(id) != 0);
    if (truth.empty()) return recall_at_percent(rel, k_percent);
    auto top = top_count(ranked.size(), k_percent);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < top; ++i) hit += rel[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

struct EvalItem {
    Digest identity = 0;
    ClassLabel truth = ClassLabel::FalseWarning;

    bool awhb() const { return truth == ClassLabel::VTB || truth == ClassLabel::LTB; }
    friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

struct EvalSample {
    std::vector<EvalItem> items; // shuffled presentation order
    std::uint64_t seed = 0;

    std::size_t awhb_count() const {
        return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const auto& i) { return i.awhb(); }));
    }
    friend bool operator==(const EvalSample&, const EvalSample&) = default;
};

struct SampleOptions {
    std::size_t count = 100;
    std::size_t size = 1000;
    std::size_t min_awhb = 5;
};

/// Draws `count` samples of `size` distinct items. A sample short of min_awhb
/// AWHBs has randomly chosen non-AWHB members swapped for randomly chosen
/// AWHBs from outside the sample. Each sample is then shuffled.
inline std::vector<EvalSample> build_samples(const std::vector<EvalItem>& dataset, const SampleOptions& opts,
                                             std::uint64_t seed) {
    std::vector<std::size_t> awhb_pool;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (dataset[i].awhb()) awhb_pool.push_back(i);
    if (dataset.size() < opts.size)
        throw InsufficientData("dataset has " + std::to_string(dataset.size()) + " warnings, samples need " +
                               std::to_string(opts.size));
    if (awhb_pool.size() < opts.min_awhb || opts.min_awhb > opts.size)
        throw InsufficientData("dataset has " + std::to_string(awhb_pool.size()) + " AWHBs, samples need " +
                               std::to_string(opts.min_awhb));

    std::vector<EvalSample> out;
    out.reserve(opts.count);
    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t s = 0; s < opts.count; ++s) {
        EvalSample sample;
        sample.seed = derive_seed(seed, 1000 + s);
        Rng rng(sample.seed);

        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (std::size_t i = 0; i < opts.size; ++i) {
            auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        std::vector<std::size_t> chosen(idx.begin(), idx.begin() + static_cast<long>(opts.size));

        std::set<std::size_t> in_sample(chosen.begin(), chosen.end());
        std::vector<std::size_t> plain_slots, outside;
        std::size_t have = 0;
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            if (dataset[chosen[k]].awhb()) ++have;
            else plain_slots.push_back(k);
        }
        for (auto a : awhb_pool)
            if (!in_sample.count(a)) outside.push_back(a);
        while (have < opts.min_awhb) {
            auto pi = static_cast<std::size_t>(rng.below(plain_slots.size()));
            auto oi = static_cast<std::size_t>(rng.below(outside.size()));
            chosen[plain_slots[pi]] = outside[oi];
            plain_slots.erase(plain_slots.begin() + static_cast<long>(pi));
            outside.erase(outside.begin() + static_cast<long>(oi));
            ++have;
        }

        rng.shuffle(chosen);
        for (auto i : chosen) sample.items.push_back(dataset[i]);
        out.push_back(std::move(sample));
    }
    return out;
}

enum class GainMode { Binary, Graded };

/// Binary: AWHB = 1. Graded: VTB = 3, LTB = 2, otherwise 0.
inline double gain(ClassLabel truth, GainMode mode) {
    if (mode == GainMode::Binary) return truth == ClassLabel::VTB || truth == ClassLabel::LTB ? 1.0 : 0.0;
    return truth == ClassLabel::VTB ? 3.0 : truth == ClassLabel::LTB ? 2.0 : 0.0;
}

inline const std::vector<std::size_t>& ndcg_cutoffs() {
    static const std::vector<std::size_t> k = {1, 3, 5};
    return k;
}

inline const std::vector<int>& recall_percents() {
    static const std::vector<int> k = {1, 2, 5, 10, 20, 50, 100};
    return k;
}

struct SampleMetrics {
    std::map<std::size_t, double> ndcg;
    double reciprocal_rank = 0.0;
    std::vector<double> recall_curve; // index k-1 holds Recall@Top-k%, k = 1..100
};

struct MetricsReport {
    std::map<std::size_t, double> ndcg;
    double mrr = 0.0;
    std::map<int, double> recall_at_percent;
    std::vector<double> recall_curve; // k = 1..100
    std::size_t samples = 0;
    std::vector<SampleMetrics> per_sample;
};

/// Items of a sample ordered for presentation: by score descending, then
/// identity ascending.
inline std::vector<EvalItem> order_sample(const EvalSample& s, const std::unordered_map<Digest, double>& scores) {
    std::vector<std::pair<double, EvalItem>> keyed;
    keyed.reserve(s.items.size());
    for (const auto& it : s.items) {
        auto f = scores.find(it.identity);
        if (f == scores.end()) throw ArtifactError("ranking has no score for warning " + digest_hex(it.identity));
        keyed.emplace_back(f->second, it);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.identity < b.second.identity;
    });
    std::vector<EvalItem> out;
    out.reserve(keyed.size());
    for (auto& [_, it] : keyed) out.push_back(it);
    return out;
}

inline SampleMetrics evaluate_ordering(const std::vector<EvalItem>& ordered, GainMode mode) {
    SampleMetrics m;
    std::vector<double> gains;
    std::vector<bool> rel;
    for (const auto& it : ordered) {
        gains.push_back(gain(it.truth, mode));
        rel.push_back(it.awhb());
    }
    for (auto k : ndcg_cutoffs()) m.ndcg[k] = ndcg_at_k(gains, k);
    m.reciprocal_rank = reciprocal_rank(rel);
    for (int k = 1; k <= 100; ++k) m.recall_curve.push_back(recall_at_percent(rel, k));
    return m;
}

inline MetricsReport summarize(std::vector<SampleMetrics> per_sample) {
    MetricsReport r;
    r.samples = per_sample.size();
    r.recall_curve.assign(100, 0.0);
    if (per_sample.empty()) return r;
    const double n = static_cast<double>(per_sample.size());
    for (auto k : ndcg_cutoffs()) r.ndcg[k] = 0.0;
    for (const auto& m : per_sample) {
        for (auto k : ndcg_cutoffs()) r.ndcg[k] += m.ndcg.at(k);
        r.mrr += m.reciprocal_rank;
        for (std::size_t i = 0; i < 100; ++i) r.recall_curve[i] += m.recall_curve[i];
    }
    auto mean = [n](double& v) { v = std::min(1.0, v / n); };
    for (auto& [_, v] : r.ndcg) mean(v);
    mean(r.mrr);
    for (auto& v : r.recall_curve) mean(v);
    for (int k : recall_percents()) r.recall_at_percent[k] = r.recall_curve[static_cast<std::size_t>(k - 1)];
    r.per_sample = std::move(per_sample);
    return r;
}

inline MetricsReport evaluate(const std::vector<EvalSample>& samples, const std::unordered_map<Digest, double>& scores,
                              GainMode mode = GainMode::Binary) {
    std::vector<SampleMetrics> per;
    per.reserve(samples.size());
    for (const auto& s : samples) per.push_back(evaluate_ordering(order_sample(s, scores), mode));
    return summarize(std::move(per));
}

inline std::unordered_map<Digest, double> score_map(const RankedList& ranked) {
    std::unordered_map<Digest, double> m;
    for (const auto& r : ranked) m.emplace(r.identity, r.score);
    return m;
}

/// Uniformly random orderings of the same samples.
inline MetricsReport evaluate_random(const std::vector<EvalSample>& samples, std::uint64_t seed,
                                     GainMode mode = GainMode::Binary) {
    std::vector<SampleMetrics> per;
    per.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto items = samples[i].items;
        Rng rng(derive_seed(seed, 5000 + i));
        rng.shuffle(items);
        per.push_back(evaluate_ordering(items, mode));
    }
    return summarize(std::move(per));
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& r) {
    nlohmann::ordered_json ndcg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.ndcg) ndcg[std::to_string(k)] = v;
    nlohmann::ordered_json recall = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.recall_at_percent) recall[std::to_string(k)] = v;
    return {{"samples", r.samples}, {"ndcg", ndcg}, {"mrr", r.mrr}, {"recall_at_percent", recall}};
}

inline std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s %8s %10s\n", "ranking", "nDCG@1", "nDCG@3", "nDCG@5", "MRR",
                  "Recall@5%");
    os << buf;
    for (const auto& [name, r] : rows) {
        auto at = [&](std::size_t k) { return r.ndcg.count(k) ? r.ndcg.at(k) : 0.0; };
        double rec = r.recall_at_percent.count(5) ? r.recall_at_percent.at(5) : 0.0;
        std::snprintf(buf, sizeof buf, "%-12s %8.4f %8.4f %8.4f %8.4f %10.4f\n", name.c_str(), at(1), at(3), at(5),
                      r.mrr, rec);
        os << buf;
    }
    return os.str();
}

inline std::string recall_curve_csv(const MetricsReport& model, const MetricsReport* random = nullptr) {
    std::ostringstream os;
    os << "k_percent,recall" << (random ? ",random_recall" : "") << "\n";
    char buf[96];
    for (std::size_t i = 0; i < model.recall_curve.size(); ++i) {
        if (random) std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f\n", i + 1, model.recall_curve[i], random->recall_curve[i]);
        else std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i + 1, model.recall_curve[i]);
        os << buf;
    }
    return os.str();
}

} // namespace warntriage
