#pragma once

#include "warntriage/commit_graph.hpp"
#include "warntriage/runner.hpp"
#include "warntriage/warning.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace warntriage {

struct ActionableWarning {
    WarningRecord warning;
    CommitId last_present;
    CommitId fix_commit;

    friend bool operator==(const ActionableWarning&, const ActionableWarning&) = default;
};

/// Bisects one linear history for warnings that vanish between adjacent
/// revisions. An interval whose endpoints have equal warning sets is skipped
/// entirely, so a warning introduced and removed strictly inside such an
/// interval is not reported.
inline std::vector<ActionableWarning> binary_search_history(const LinearHistory& history,
                                                            ToolRunner& runner,
                                                            WarningSetCache* cache) {
    std::vector<ActionableWarning> out;
    const auto& c = history.commits;
    if (c.size() < 2) return out;

    auto at = [&](std::size_t i) { return warning_set(c[i], runner, cache); };

    std::function<void(std::size_t, std::size_t)> search = [&](std::size_t l, std::size_t r) {
        auto wl = at(l);
        auto wr = at(r);
        if (wl->same_ids(*wr)) return;
        if (r == l + 1) {
            for (const auto& [id, rec] : wl->records)
                if (!wr->contains(id)) out.push_back({rec, c[l], c[r]});
            return;
        }
        auto m = (l + r) / 2;
        search(l, m);
        search(m, r);
    };
    search(0, c.size() - 1);
    return out;
}

struct Survivor {
    WarningRecord warning;
    std::int64_t first_seen = 0;
    CommitId tip;

    friend bool operator==(const Survivor&, const Survivor&) = default;
};

struct TwoYearSplit {
    std::vector<Survivor> false_warnings;
    std::vector<Survivor> excluded;
};

inline constexpr int kDefaultFalseWarningDays = 730;

/// Survivors older than threshold_days (strictly) are false warnings; younger
/// ones are excluded from the labeled data.
inline TwoYearSplit apply_two_year_rule(std::span<const Survivor> surviving, std::int64_t head_time,
                                        int threshold_days = kDefaultFalseWarningDays) {
    const std::int64_t limit = static_cast<std::int64_t>(threshold_days) * 86400;
    TwoYearSplit out;
    for (const auto& s : surviving) {
        if (head_time - s.first_seen > limit) out.false_warnings.push_back(s);
        else out.excluded.push_back(s);
    }
    return out;
}

struct MiningResult {
    std::vector<LinearHistory> histories;
    std::vector<ActionableWarning> actionable;
    std::vector<Survivor> false_warnings;
    std::vector<Survivor> excluded;
};

struct MiningOptions {
    int threshold_days = kDefaultFalseWarningDays;
    unsigned jobs = 1;
};

/// Earliest commit on tip's first-parent chain from which `id` is present
/// through to the tip, found by bisection (presence assumed contiguous).
inline CommitId first_occurrence(const std::vector<CommitId>& chain, Digest id, ToolRunner& runner,
                                 WarningSetCache* cache) {
    std::size_t lo = 0, hi = chain.size() - 1;
    while (lo < hi) {
        auto mid = (lo + hi) / 2;
        if (warning_set(chain[mid], runner, cache)->contains(id)) hi = mid;
        else lo = mid + 1;
    }
    return chain[lo];
}

/// Full mining pass: linearize, bisect every history, then split the
/// warnings still present at the branch tips with the two-year rule.
inline MiningResult mine(const CommitGraph& graph, const std::vector<CommitId>& tips, ToolRunner& runner,
                         WarningSetCache& cache, const MiningOptions& opts = {}) {
    MiningResult result;
    result.histories = linearize(graph);

    std::vector<std::vector<ActionableWarning>> per_history(result.histories.size());
    // The live backend owns a single worktree, so only replay mines concurrently.
    unsigned jobs = runner.backend() == Backend::Replay ? std::max(1u, opts.jobs) : 1u;
    if (jobs == 1) {
        for (std::size_t i = 0; i < result.histories.size(); ++i)
            per_history[i] = binary_search_history(result.histories[i], runner, &cache);
    } else {
        std::vector<std::future<void>> workers;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < jobs; ++w) {
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < result.histories.size(); i = next++)
                    per_history[i] = binary_search_history(result.histories[i], runner, &cache);
            }));
        }
        for (auto& f : workers) f.get();
    }
    for (auto& h : per_history)
        result.actionable.insert(result.actionable.end(), h.begin(), h.end());

    // A warning alive at several tips is judged once, at the first tip listed.
    std::set<Digest> judged;
    for (const auto& tip : tips) {
        auto chain = graph.first_parent_chain(tip);
        auto snap = warning_set(tip, runner, &cache);
        std::vector<Survivor> alive;
        for (const auto& [id, rec] : snap->records) {
            if (!judged.insert(id).second) continue;
            auto first = first_occurrence(chain, id, runner, &cache);
            alive.push_back({rec, graph.node(first).timestamp, tip});
        }
        auto split = apply_two_year_rule(alive, graph.node(tip).timestamp, opts.threshold_days);
        for (auto& s : split.false_warnings) result.false_warnings.push_back(std::move(s));
        for (auto& s : split.excluded) result.excluded.push_back(std::move(s));
    }
    return result;
}

/// Branch tips of an in-memory graph: commits without children.
inline std::vector<CommitId> graph_tips(const CommitGraph& g) {
    std::vector<CommitId> tips;
    for (const auto& n : g.nodes())
        if (n.children.empty()) tips.push_back(n.id);
    std::sort(tips.begin(), tips.end(), [&g](const CommitId& a, const CommitId& b) { return g.before(a, b); });
    return tips;
}

} // namespace warntriage
