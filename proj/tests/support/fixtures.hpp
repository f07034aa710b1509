#pragma once

#include "warntriage/warntriage.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wt_test {

using namespace warntriage;

class TempDir {
public:
    TempDir() {
        auto tmpl = (std::filesystem::temp_directory_path() / "warntriage-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string slurp(const std::filesystem::path& p) {
    auto t = read_file(p);
    return t ? *t : std::string();
}

/// Small distinct warning keyed by a name.
inline WarningRecord warn(const std::string& name, WarningType t = WarningType::NullDereference) {
    return make_record(Tool::Infer, t, "src/" + name + ".c", 10, std::nullopt, "proc_" + name,
                       "pointer `p` last assigned on line 8 could be null and is dereferenced at line 10",
                       "use(" + name + ");");
}

/// In-memory runner serving fixed per-commit warning lists.
class MapRunner : public ToolRunner {
public:
    explicit MapRunner(std::map<CommitId, std::vector<WarningRecord>> data, Backend b = Backend::Replay)
        : data_(std::move(data)), backend_(b) {}

    std::string key() const override { return "map"; }
    Backend backend() const override { return backend_; }
    std::vector<WarningRecord> run(const CommitId& commit) override {
        ++calls_;
        auto it = data_.find(commit);
        if (it == data_.end()) throw MissingReplayData("no data for " + commit);
        return it->second;
    }
    std::size_t calls() const { return calls_.load(); }

private:
    std::map<CommitId, std::vector<WarningRecord>> data_;
    Backend backend_;
    std::atomic<std::size_t> calls_{0};
};

inline CommitNode node(const std::string& id, std::vector<std::string> parents, std::int64_t ts,
                       std::string message = "") {
    CommitNode n;
    n.id = id;
    n.parents = std::move(parents);
    n.timestamp = ts;
    n.message = message.empty() ? "commit " + id : std::move(message);
    return n;
}

/// The branching/merging example graph: 1-2-3-5-6, 2-4, 4-7, 4-9-8, and
/// merge 10 <- {7, 8} followed by 11. Ids are "n1".."n11".
inline std::vector<CommitNode> fig3_nodes() {
    auto id = [](int i) { return "n" + std::to_string(i); };
    std::vector<std::pair<int, std::vector<int>>> shape = {
        {1, {}}, {2, {1}}, {3, {2}}, {4, {2}}, {5, {3}}, {6, {5}}, {7, {4}}, {9, {4}}, {8, {9}}, {10, {7, 8}}, {11, {10}},
    };
    std::vector<CommitNode> nodes;
    for (const auto& [i, ps] : shape) {
        std::vector<std::string> parents;
        for (int p : ps) parents.push_back(id(p));
        nodes.push_back(node(id(i), parents, 1000 * i));
    }
    return nodes;
}

inline std::vector<std::vector<std::string>> fig3_expected_histories() {
    return {{"n1", "n2", "n3", "n5", "n6"}, {"n2", "n4", "n7"}, {"n4", "n9", "n8"}, {"n10", "n11"}};
}

/// Random DAG: node i draws up to `max_parents` distinct earlier parents.
inline std::vector<CommitNode> random_dag(Rng& rng, std::size_t n, int max_parents = 2) {
    std::vector<CommitNode> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        std::set<std::string> parents;
        if (i > 0) {
            auto k = rng.below(static_cast<std::uint64_t>(max_parents) + 1);
            if (k == 0 && rng.below(4) != 0) k = 1;
            for (std::uint64_t j = 0; j < k; ++j) parents.insert("c" + std::to_string(rng.below(i)));
        }
        nodes.push_back(node("c" + std::to_string(i), {parents.begin(), parents.end()},
                             static_cast<std::int64_t>(rng.below(1000000))));
    }
    return nodes;
}

/// Scratch git repository driven through the git CLI with pinned dates.
class GitRepo {
public:
    explicit GitRepo(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        git({"init", "-q", "-b", "main"});
    }

    const std::filesystem::path& dir() const { return dir_; }

    /// Commit with an arbitrary parent list on the empty tree.
    std::string commit_tree(const std::vector<std::string>& parents, std::int64_t ts, const std::string& message) {
        auto tree = git({"mktree"}, "");
        std::vector<std::string> args = {"commit-tree", tree};
        for (const auto& p : parents) {
            args.push_back("-p");
            args.push_back(p);
        }
        args.push_back("-m");
        args.push_back(message);
        return git(args, std::nullopt, ts);
    }

    /// Writes files into the working tree and commits them on the current branch.
    std::string commit_files(const std::map<std::string, std::string>& files, std::int64_t ts,
                             const std::string& message) {
        for (const auto& [path, text] : files) write_text(dir_ / path, text);
        git({"add", "-A"});
        git({"commit", "-q", "--allow-empty", "-m", message}, std::nullopt, ts);
        return git({"rev-parse", "HEAD"});
    }

    void set_ref(const std::string& name, const std::string& id) { git({"update-ref", "refs/heads/" + name, id}); }

    std::string git(const std::vector<std::string>& args, std::optional<std::string> stdin_text = std::nullopt,
                    std::optional<std::int64_t> ts = std::nullopt) {
        std::vector<std::string> argv = {"env"};
        if (ts) {
            auto date = "@" + std::to_string(*ts) + " +0000";
            argv.push_back("GIT_AUTHOR_DATE=" + date);
            argv.push_back("GIT_COMMITTER_DATE=" + date);
        }
        for (auto s : {"git", "-c", "user.name=fixture", "-c", "user.email=fixture@example.com", "-C"})
            argv.emplace_back(s);
        argv.push_back(dir_.string());
        argv.insert(argv.end(), args.begin(), args.end());
        if (stdin_text) {
            auto in = dir_.parent_path() / (dir_.filename().string() + ".stdin");
            write_text(in, *stdin_text);
            std::string cmd;
            for (const auto& a : argv) cmd += shell_quote(a) + " ";
            auto r = run_process({"sh", "-c", cmd + "< " + shell_quote(in.string())});
            if (r.exit_code != 0) throw std::runtime_error("git failed: " + cmd);
            return trim_nl(r.out);
        }
        auto r = run_process(argv);
        if (r.exit_code != 0) throw std::runtime_error("git failed: " + args.front());
        return trim_nl(r.out);
    }

private:
    static std::string trim_nl(std::string s) {
        while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
        return s;
    }
    std::filesystem::path dir_;
};

/// Adjacent-pair scan: every identity in W(i) missing from W(i+1).
inline std::vector<ActionableWarning> exhaustive_scan(const LinearHistory& h, ToolRunner& runner) {
    std::vector<ActionableWarning> out;
    for (std::size_t i = 0; i + 1 < h.commits.size(); ++i) {
        auto a = warning_set(h.commits[i], runner, nullptr);
        auto b = warning_set(h.commits[i + 1], runner, nullptr);
        for (const auto& [id, r] : a->records)
            if (!b->contains(id)) out.push_back({r, h.commits[i], h.commits[i + 1]});
    }
    return out;
}

} // namespace wt_test
