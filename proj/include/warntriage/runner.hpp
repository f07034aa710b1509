#pragma once

#include "warntriage/adapters.hpp"
#include "warntriage/commit_graph.hpp"
#include "warntriage/process.hpp"
#include "warntriage/record_json.hpp"
#include "warntriage/warning.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace warntriage {

/// Deduplicated warnings of one revision, keyed by identity.
struct WarningSnapshot {
    std::map<Digest, WarningRecord> records;

    std::set<Digest> ids() const {
        std::set<Digest> out;
        for (const auto& [id, r] : records) out.insert(id);
        return out;
    }
    bool contains(Digest d) const { return records.count(d) != 0; }
    std::size_t size() const { return records.size(); }

    /// Compares identity sets only.
    bool same_ids(const WarningSnapshot& other) const {
        if (records.size() != other.records.size()) return false;
        auto a = records.begin();
        auto b = other.records.begin();
        for (; a != records.end(); ++a, ++b)
            if (a->first != b->first) return false;
        return true;
    }
};

enum class Backend { Live, Replay };

/// Produces the raw warning list of one revision.
class ToolRunner {
public:
    virtual ~ToolRunner() = default;
    /// Distinguishes cache entries of different tools/backends for one commit.
    virtual std::string key() const = 0;
    virtual Backend backend() const = 0;
    virtual std::vector<WarningRecord> run(const CommitId& commit) = 0;
};

/// Serves `<replay_dir>/<commit>.jsonl`.
class ReplayRunner : public ToolRunner {
public:
    explicit ReplayRunner(std::filesystem::path replay_dir) : dir_(std::move(replay_dir)) {}

    std::string key() const override { return "replay:" + dir_.string(); }
    Backend backend() const override { return Backend::Replay; }

    std::vector<WarningRecord> run(const CommitId& commit) override {
        ++reads_;
        auto path = dir_ / (commit + ".jsonl");
        auto text = read_file(path);
        if (!text) throw MissingReplayData("no replay data for commit " + commit + " at " + path.string());
        return records_from_jsonl(*text);
    }

    std::size_t backend_reads() const { return reads_.load(); }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::atomic<std::size_t> reads_{0};
};

struct AnalyzerSpec {
    std::string tool;        // adapter name, e.g. "infer"
    std::string command;     // run inside the worktree
    std::string report_path; // relative to the worktree
};

struct LiveConfig {
    std::string repo;
    std::filesystem::path worktree;
    std::string build_command;
    std::vector<AnalyzerSpec> analyzers;
    int timeout_seconds = 1800;
};

/// Checks out each commit into a scratch worktree, builds it and runs the
/// configured analyzers. Not safe for concurrent run() calls (one worktree).
class LiveRunner : public ToolRunner {
public:
    explicit LiveRunner(LiveConfig cfg) : cfg_(std::move(cfg)) {}

    std::string key() const override {
        std::string k = "live:" + cfg_.repo;
        for (const auto& a : cfg_.analyzers) k += ":" + a.tool;
        return k;
    }
    Backend backend() const override { return Backend::Live; }

    std::vector<WarningRecord> run(const CommitId& commit) override {
        std::lock_guard lock(mu_);
        checkout(commit);
        run_step(cfg_.build_command, "build", commit);

        const auto root = cfg_.worktree;
        SourceLookup lookup = [root](const std::string& file, int line) -> std::optional<std::string> {
            auto text = read_file(root / file);
            if (!text) return std::nullopt;
            return nth_line(*text, line);
        };
        auto registry = AdapterRegistry::with_defaults(lookup);

        std::vector<WarningRecord> all;
        for (const auto& a : cfg_.analyzers) {
            run_step(a.command, a.tool, commit);
            auto report = read_file(root / a.report_path);
            if (!report)
                throw BuildFailure(a.tool + " produced no report at " + a.report_path + " for " + commit);
            auto recs = registry.parse(a.tool, *report);
            all.insert(all.end(), recs.begin(), recs.end());
        }
        return all;
    }

private:
    void checkout(const CommitId& commit) {
        ProcessResult r;
        if (!std::filesystem::exists(cfg_.worktree)) {
            r = run_process({"git", "-C", cfg_.repo, "worktree", "add", "--detach", "--force",
                             cfg_.worktree.string(), commit});
        } else {
            r = run_process({"git", "-C", cfg_.worktree.string(), "checkout", "--detach", "--force", commit});
            if (r.exit_code == 0) r = run_process({"git", "-C", cfg_.worktree.string(), "clean", "-fdxq"});
        }
        if (r.exit_code != 0) throw RepoAccessError("cannot check out " + commit + " into " + cfg_.worktree.string());
    }

    void run_step(const std::string& command, const std::string& what, const CommitId& commit) {
        if (command.empty()) return;
        auto r = run_process({"timeout", "--kill-after=5", std::to_string(cfg_.timeout_seconds), "sh", "-c",
                              "cd " + shell_quote(cfg_.worktree.string()) + " && " + command});
        if (r.exit_code == 124 || r.exit_code == 137)
            throw BuildTimeout(what + " exceeded " + std::to_string(cfg_.timeout_seconds) + "s at " + commit);
        if (r.exit_code != 0)
            throw BuildFailure(what + " failed with exit " + std::to_string(r.exit_code) + " at " + commit);
    }

    LiveConfig cfg_;
    std::mutex mu_;
};

/// Shared (commit, tool) -> snapshot cache. Concurrent readers; a missing
/// entry may be computed by several workers at once, last insert wins.
class WarningSetCache {
public:
    std::shared_ptr<const WarningSnapshot> find(const std::string& key) const {
        std::shared_lock lock(mu_);
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : it->second;
    }

    void insert(const std::string& key, std::shared_ptr<const WarningSnapshot> snap) {
        std::unique_lock lock(mu_);
        entries_[key] = std::move(snap);
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return entries_.size();
    }

    std::size_t hits() const { return hits_.load(); }
    std::size_t misses() const { return misses_.load(); }
    void count_hit() { ++hits_; }
    void count_miss() { ++misses_; }

private:
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<const WarningSnapshot>> entries_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

/// Deduplicated warnings of a commit; served from cache when one is given.
inline std::shared_ptr<const WarningSnapshot> warning_set(const CommitId& commit, ToolRunner& runner,
                                                          WarningSetCache* cache) {
    std::string key = commit + "\x1f" + runner.key();
    if (cache) {
        if (auto hit = cache->find(key)) {
            cache->count_hit();
            return hit;
        }
        cache->count_miss();
    }
    auto snap = std::make_shared<WarningSnapshot>();
    for (auto& r : dedup(runner.run(commit))) {
        auto id = r.identity;
        snap->records.emplace(id, std::move(r));
    }
    std::shared_ptr<const WarningSnapshot> result = std::move(snap);
    if (cache) cache->insert(key, result);
    return result;
}

} // namespace warntriage
