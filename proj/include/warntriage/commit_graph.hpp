#pragma once

#include "warntriage/error.hpp"
#include "warntriage/process.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace warntriage {

using CommitId = std::string;

struct CommitNode {
    CommitId id;
    std::vector<CommitId> parents;
    std::vector<CommitId> children;
    std::int64_t timestamp = 0;
    std::string message;

    bool is_merge() const { return parents.size() >= 2; }
};

struct LinearHistory {
    std::vector<CommitId> commits; // oldest -> newest

    friend bool operator==(const LinearHistory&, const LinearHistory&) = default;
};

using Edge = std::pair<CommitId, CommitId>; // parent -> child

/// Commit DAG with consistent parent/child links. Parents that are not in the
/// node set (shallow boundaries) are dropped.
class CommitGraph {
public:
    CommitGraph() = default;

    explicit CommitGraph(std::vector<CommitNode> nodes) {
        for (auto& n : nodes) {
            n.children.clear();
            index_[n.id] = nodes_.size();
            nodes_.push_back(std::move(n));
        }
        for (auto& n : nodes_) {
            std::vector<CommitId> kept;
            for (const auto& p : n.parents)
                if (index_.count(p) && std::find(kept.begin(), kept.end(), p) == kept.end())
                    kept.push_back(p);
            n.parents = std::move(kept);
        }
        for (const auto& n : nodes_)
            for (const auto& p : n.parents) nodes_[index_.at(p)].children.push_back(n.id);
        for (auto& n : nodes_) std::sort(n.children.begin(), n.children.end(),
                                         [this](const CommitId& a, const CommitId& b) { return before(a, b); });
    }

    std::size_t size() const { return nodes_.size(); }
    bool contains(const CommitId& id) const { return index_.count(id) != 0; }
    const CommitNode& node(const CommitId& id) const { return nodes_.at(index_.at(id)); }
    const std::vector<CommitNode>& nodes() const { return nodes_; }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (const auto& n : nodes_)
            for (const auto& p : n.parents) out.emplace_back(p, n.id);
        return out;
    }

    /// Kahn order, ties broken by (timestamp, id). Throws CycleDetected.
    std::vector<CommitId> topological_order() const {
        std::unordered_map<CommitId, std::size_t> indegree;
        for (const auto& n : nodes_) indegree[n.id] = n.parents.size();
        auto cmp = [this](const CommitId& a, const CommitId& b) { return before(b, a); };
        std::vector<CommitId> ready;
        for (const auto& n : nodes_)
            if (n.parents.empty()) ready.push_back(n.id);
        std::make_heap(ready.begin(), ready.end(), cmp);

        std::vector<CommitId> out;
        while (!ready.empty()) {
            std::pop_heap(ready.begin(), ready.end(), cmp);
            auto id = ready.back();
            ready.pop_back();
            out.push_back(id);
            for (const auto& c : node(id).children) {
                if (--indegree[c] == 0) {
                    ready.push_back(c);
                    std::push_heap(ready.begin(), ready.end(), cmp);
                }
            }
        }
        if (out.size() != nodes_.size()) throw CycleDetected("commit graph contains a cycle");
        return out;
    }

    /// (timestamp, id) ascending.
    bool before(const CommitId& a, const CommitId& b) const {
        const auto& na = nodes_[index_.at(a)];
        const auto& nb = nodes_[index_.at(b)];
        if (na.timestamp != nb.timestamp) return na.timestamp < nb.timestamp;
        return na.id < nb.id;
    }

    /// Oldest-first chain following first parents back from tip.
    std::vector<CommitId> first_parent_chain(const CommitId& tip) const {
        std::vector<CommitId> chain;
        std::set<CommitId> visited;
        CommitId cur = tip;
        while (visited.insert(cur).second) {
            chain.push_back(cur);
            const auto& n = node(cur);
            if (n.parents.empty()) break;
            cur = n.parents.front();
        }
        std::reverse(chain.begin(), chain.end());
        return chain;
    }

private:
    std::vector<CommitNode> nodes_;
    std::unordered_map<CommitId, std::size_t> index_;
};

/// Edges that survive merge stripping: every incoming edge of a node with two
/// or more parents is removed.
inline std::vector<Edge> stripped_edges(const CommitGraph& g) {
    std::vector<Edge> out;
    for (const auto& n : g.nodes())
        if (!n.is_merge())
            for (const auto& p : n.parents) out.emplace_back(p, n.id);
    return out;
}

/// Decomposes the merge-stripped graph into linear histories.
///
/// After stripping every node has at most one parent, so the graph is a
/// forest. A history starts at each parentless node; at a node with several
/// children the arriving history continues to the first child in
/// (timestamp, id) order and one new history, starting at the branching node,
/// is seeded per remaining child. Every surviving edge lands in exactly one
/// history.
inline std::vector<LinearHistory> linearize(const CommitGraph& g) {
    auto topo = g.topological_order();

    std::unordered_map<CommitId, std::vector<CommitId>> kids;
    std::unordered_map<CommitId, bool> has_parent;
    for (const auto& n : g.nodes()) {
        has_parent[n.id] = !n.parents.empty() && !n.is_merge();
        auto& k = kids[n.id];
        for (const auto& c : n.children)
            if (!g.node(c).is_merge()) k.push_back(c);
    }

    auto walk = [&](LinearHistory& h) {
        for (;;) {
            const auto& k = kids[h.commits.back()];
            if (k.empty()) break;
            h.commits.push_back(k.front());
        }
    };

    std::vector<LinearHistory> out;
    for (const auto& id : topo) {
        if (!has_parent[id]) {
            LinearHistory h{{id}};
            walk(h);
            out.push_back(std::move(h));
        }
        const auto& k = kids[id];
        for (std::size_t i = 1; i < k.size(); ++i) {
            LinearHistory h{{id, k[i]}};
            walk(h);
            out.push_back(std::move(h));
        }
    }
    return out;
}

/// Reads the ancestry of branch_tips from a git repository with `git log`.
inline CommitGraph build_commit_graph(const std::string& repo,
                                      const std::vector<std::string>& branch_tips) {
    auto probe = run_process({"git", "-C", repo, "rev-parse", "--git-dir"});
    if (probe.exit_code != 0) throw RepoAccessError("not a readable git repository: " + repo);
    if (branch_tips.empty()) throw UnresolvedRef("no branch tips given");

    std::vector<std::string> resolved;
    for (const auto& tip : branch_tips) {
        auto r = run_process({"git", "-C", repo, "rev-parse", "--verify", "--quiet", tip + "^{commit}"});
        if (r.exit_code != 0) throw UnresolvedRef("cannot resolve '" + tip + "' in " + repo);
        auto id = r.out.substr(0, r.out.find_first_of("\r\n"));
        resolved.push_back(id);
    }

    std::vector<std::string> argv = {"git", "-C", repo, "log", "-z", "--format=%H%x1f%P%x1f%ct%x1f%B"};
    argv.insert(argv.end(), resolved.begin(), resolved.end());
    auto log = run_process(argv);
    if (log.exit_code != 0) throw RepoAccessError("git log failed in " + repo);

    std::vector<CommitNode> nodes;
    std::size_t pos = 0;
    const auto& text = log.out;
    while (pos < text.size()) {
        auto end = text.find('\0', pos);
        if (end == std::string::npos) end = text.size();
        std::string rec = text.substr(pos, end - pos);
        pos = end + 1;
        if (rec.empty()) continue;

        std::vector<std::string> fields;
        std::size_t fpos = 0;
        for (int i = 0; i < 3; ++i) {
            auto sep = rec.find('\x1f', fpos);
            if (sep == std::string::npos) throw RepoAccessError("unexpected git log output");
            fields.push_back(rec.substr(fpos, sep - fpos));
            fpos = sep + 1;
        }
        CommitNode n;
        n.id = fields[0];
        std::size_t ppos = 0;
        while (ppos < fields[1].size()) {
            auto sp = fields[1].find(' ', ppos);
            if (sp == std::string::npos) sp = fields[1].size();
            if (sp > ppos) n.parents.push_back(fields[1].substr(ppos, sp - ppos));
            ppos = sp + 1;
        }
        n.timestamp = std::stoll(fields[2]);
        n.message = rec.substr(fpos);
        while (!n.message.empty() && (n.message.back() == '\n' || n.message.back() == '\r'))
            n.message.pop_back();
        nodes.push_back(std::move(n));
    }
    // git log emits newest first; keep the graph oldest first.
    std::reverse(nodes.begin(), nodes.end());
    return CommitGraph(std::move(nodes));
}

} // namespace warntriage
