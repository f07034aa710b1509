#pragma once

#include "warntriage/artifacts.hpp"
#include "warntriage/checkpoint.hpp"
#include "warntriage/commit_graph.hpp"
#include "warntriage/config.hpp"
#include "warntriage/diff.hpp"
#include "warntriage/encoder.hpp"
#include "warntriage/error.hpp"
#include "warntriage/features.hpp"
#include "warntriage/labeler.hpp"
#include "warntriage/metrics.hpp"
#include "warntriage/miner.hpp"
#include "warntriage/model.hpp"
#include "warntriage/runner.hpp"
#include "warntriage/synthetic.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace warntriage {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kConfig = 2;
inline constexpr int kDataAccess = 3;
inline constexpr int kArtifact = 4;
inline constexpr int kDegenerate = 5;
} // namespace exit_code

namespace artifact {
inline constexpr const char* kActionable = "actionable.jsonl";
inline constexpr const char* kFalseWarnings = "false_warnings.jsonl";
inline constexpr const char* kDataset = "dataset.jsonl";
inline constexpr const char* kModel = "model.ckpt";
inline constexpr const char* kRanked = "ranked.jsonl";
inline constexpr const char* kMetrics = "metrics.json";
inline constexpr const char* kMetricsTable = "metrics.txt";
inline constexpr const char* kRecallCurve = "recall_curve.csv";
} // namespace artifact

/// Commit graph from a JSONL file: one {"id", "parents", "timestamp", "message"} per line.
inline CommitGraph load_graph_file(const std::filesystem::path& p) {
    auto text = read_file(p);
    if (!text) throw RepoAccessError("cannot read commit graph " + p.string());
    std::vector<CommitNode> nodes;
    std::istringstream in(*text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            CommitNode n;
            n.id = j.at("id").get<std::string>();
            n.parents = j.value("parents", std::vector<std::string>{});
            n.timestamp = j.at("timestamp").get<std::int64_t>();
            n.message = j.value("message", "");
            nodes.push_back(std::move(n));
        } catch (const json::exception& e) {
            throw RepoAccessError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return CommitGraph(std::move(nodes));
}

inline std::filesystem::path out_dir(const Config& cfg) {
    auto p = cfg.path("out");
    if (p.empty()) throw ConfigError("config key 'out' must not be empty");
    return p;
}

inline CommitGraph load_graph(const Config& cfg) {
    if (!cfg.str("graph_file").empty()) return load_graph_file(cfg.path("graph_file"));
    if (!cfg.str("repo").empty()) {
        auto branches = cfg.list("branches");
        if (branches.empty()) throw ConfigError("config key 'branches' must name at least one tip");
        return build_commit_graph(cfg.path("repo").string(), branches);
    }
    throw ConfigError("either 'graph_file' or 'repo' must be set");
}

inline std::unique_ptr<ToolRunner> make_runner(const Config& cfg) {
    const auto& backend = cfg.str("backend");
    if (backend == "replay") {
        if (cfg.str("replay_dir").empty()) throw ConfigError("the replay backend needs 'replay_dir'");
        auto dir = cfg.path("replay_dir");
        if (!std::filesystem::is_directory(dir)) throw MissingReplayData("replay directory not found: " + dir.string());
        return std::make_unique<ReplayRunner>(dir);
    }
    if (backend == "live") {
        if (cfg.str("repo").empty()) throw ConfigError("the live backend needs 'repo'");
        LiveConfig lc;
        lc.repo = cfg.path("repo").string();
        lc.worktree = cfg.str("worktree").empty() ? out_dir(cfg) / ".worktree" : cfg.path("worktree");
        lc.build_command = cfg.str("build_command");
        lc.timeout_seconds = static_cast<int>(cfg.integer("timeout_seconds", 1));
        for (const auto& tool : cfg.list("tools")) {
            if (tool == "infer") lc.analyzers.push_back({tool, cfg.str("infer_command"), cfg.str("infer_report")});
            else if (tool == "flawfinder")
                lc.analyzers.push_back({tool, cfg.str("flawfinder_command"), cfg.str("flawfinder_report")});
            else throw ConfigError("unknown tool '" + tool + "'");
        }
        if (lc.analyzers.empty()) throw ConfigError("'tools' selects no analyzer");
        return std::make_unique<LiveRunner>(std::move(lc));
    }
    throw ConfigError("unknown backend '" + backend + "' (expected replay or live)");
}

inline Hyperparams hyperparams_from(const Config& cfg) {
    Hyperparams hp;
    hp.hidden = static_cast<std::size_t>(cfg.integer("hidden", 1));
    hp.learning_rate = cfg.real("learning_rate");
    hp.epochs = static_cast<int>(cfg.integer("epochs", 1));
    hp.batch_size = static_cast<int>(cfg.integer("batch_size", 1));
    hp.oversample = static_cast<int>(cfg.integer("oversample", 1));
    hp.init_scale = cfg.real("init_scale");
    if (!(hp.learning_rate > 0.0)) throw ConfigError("'learning_rate' must be positive");
    if (!(hp.init_scale > 0.0)) throw ConfigError("'init_scale' must be positive");
    return hp;
}

inline HashingEncoder encoder_from(const Config& cfg) {
    auto d = cfg.integer("encoder_dim", 2);
    if (d % 2 != 0) throw ConfigError("'encoder_dim' must be even");
    return HashingEncoder(static_cast<std::size_t>(d));
}

inline double test_fraction(const Config& cfg) {
    double f = cfg.real("test_fraction");
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("'test_fraction' must lie strictly between 0 and 1");
    return f;
}

/// Seeded, order-independent train/test assignment by warning identity.
inline bool is_test_split(Digest identity, std::uint64_t seed, double fraction) {
    auto h = derive_seed(seed ^ identity, 9);
    return static_cast<double>(h >> 11) * 0x1.0p-53 < fraction;
}

inline void split_dataset(const std::vector<DatasetEntry>& all, std::uint64_t seed, double fraction,
                          std::vector<DatasetEntry>* train, std::vector<DatasetEntry>* test) {
    for (const auto& e : all) {
        auto* dst = is_test_split(e.warning.identity, seed, fraction) ? test : train;
        if (dst) dst->push_back(e);
    }
}

struct MineOutput {
    std::vector<ActionableWarning> actionable;
    std::vector<Survivor> false_warnings;
    std::size_t histories = 0;
    std::size_t excluded = 0;
};

inline MineOutput mine_from_config(const Config& cfg) {
    MiningOptions opts;
    opts.threshold_days = static_cast<int>(cfg.integer("threshold_days", 0));
    opts.jobs = static_cast<unsigned>(cfg.integer("jobs", 1));
    auto runner = make_runner(cfg);
    auto graph = load_graph(cfg);
    WarningSetCache cache;
    auto r = mine(graph, graph_tips(graph), *runner, cache, opts);
    return {std::move(r.actionable), std::move(r.false_warnings), r.histories.size(), r.excluded.size()};
}

inline void cmd_mine(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto m = mine_from_config(cfg);
    std::vector<json> a, f;
    for (const auto& x : m.actionable) a.push_back(actionable_to_json(x));
    for (const auto& x : m.false_warnings) f.push_back(survivor_to_json(x));
    std::filesystem::create_directories(out);
    write_file_atomic(out / artifact::kActionable, write_jsonl(schema::kActionable, a));
    write_file_atomic(out / artifact::kFalseWarnings, write_jsonl(schema::kFalseWarnings, f));
    log << "histories: " << m.histories << "\nactionable: " << m.actionable.size()
        << "\nfalse warnings: " << m.false_warnings.size() << "\nexcluded (too recent): " << m.excluded << "\n";
}

/// Where fix messages, patches and source snapshots come from.
class RevisionSource {
public:
    explicit RevisionSource(const Config& cfg)
        : repo_(cfg.str("repo").empty() ? "" : cfg.path("repo").string()), diff_dir_(cfg.path("diff_dir")),
          source_dir_(cfg.path("source_dir")), cfg_(cfg) {}

    const CommitGraph& graph() {
        if (!graph_) graph_ = std::make_unique<CommitGraph>(load_graph(cfg_));
        return *graph_;
    }

    std::string message(const CommitId& c) {
        const auto& g = graph();
        if (!g.contains(c)) throw ArtifactError("fix commit " + c + " is not in the commit graph");
        return g.node(c).message;
    }

    std::string patch(const CommitId& before, const CommitId& fix) {
        if (!diff_dir_.empty()) {
            auto p = diff_dir_ / (fix + ".diff");
            auto text = read_file(p);
            if (!text) throw RepoAccessError("missing fix patch " + p.string());
            return *text;
        }
        if (!repo_.empty()) {
            auto r = run_process({"git", "-C", repo_, "diff", "--no-color", "--no-ext-diff", before, fix});
            if (r.exit_code != 0) throw RepoAccessError("git diff " + before + " " + fix + " failed");
            return r.out;
        }
        throw ConfigError("labeling needs 'diff_dir' or 'repo'");
    }

    std::optional<std::string> file_at(const CommitId& c, const std::string& path) {
        if (!source_dir_.empty()) return read_file(source_dir_ / c / path);
        if (!repo_.empty()) {
            auto r = run_process({"git", "-C", repo_, "show", c + ":" + path});
            if (r.exit_code == 0) return r.out;
        }
        return std::nullopt;
    }

private:
    std::string repo_;
    std::filesystem::path diff_dir_;
    std::filesystem::path source_dir_;
    const Config& cfg_;
    std::unique_ptr<CommitGraph> graph_;
};

inline DatasetEntry label_actionable(const ActionableWarning& a, RevisionSource& src) {
    auto message = src.message(a.fix_commit);
    auto hunks = parse_unified_diff(src.patch(a.last_present, a.fix_commit));
    auto post = src.file_at(a.fix_commit, a.warning.file);
    std::optional<std::string_view> post_view;
    if (post) post_view = *post;
    auto wl = label_warning(a.warning, message, hunks, post_view);

    auto before = src.file_at(a.last_present, a.warning.file);
    std::optional<std::string_view> before_view;
    if (before) before_view = *before;

    DatasetEntry e;
    e.warning = a.warning;
    e.label = class_of(wl.aggregate);
    e.cm = wl.cm;
    e.cc = wl.cc;
    e.fix_commit = a.fix_commit;
    e.features = extract_features(a.warning, before_view);
    return e;
}

inline DatasetEntry label_false(const Survivor& s, RevisionSource& src) {
    auto text = src.file_at(s.tip, s.warning.file);
    std::optional<std::string_view> view;
    if (text) view = *text;
    DatasetEntry e;
    e.warning = s.warning;
    e.features = extract_features(s.warning, view);
    return e;
}

inline std::vector<DatasetEntry> label_all(const std::vector<ActionableWarning>& actionable,
                                           const std::vector<Survivor>& false_warnings, RevisionSource& src) {
    std::vector<DatasetEntry> out;
    out.reserve(actionable.size() + false_warnings.size());
    for (const auto& a : actionable) out.push_back(label_actionable(a, src));
    for (const auto& s : false_warnings) out.push_back(label_false(s, src));
    return out;
}

/// Per-rule and per-class counts in the layout of the weak-supervision statistics table.
inline std::string label_summary(const std::vector<DatasetEntry>& entries) {
    std::size_t cm[4] = {}, cc[3] = {}, cls[4] = {};
    for (const auto& e : entries) {
        ++cls[static_cast<int>(e.label)];
        if (e.label == ClassLabel::FalseWarning) continue;
        ++cm[e.cm];
        ++cc[e.cc];
    }
    std::ostringstream os;
    char buf[128];
    auto row = [&](const char* group, const char* name, std::size_t n) {
        std::snprintf(buf, sizeof buf, "%-22s %-24s %8zu\n", group, name, n);
        os << buf;
    };
    std::snprintf(buf, sizeof buf, "%-22s %-24s %8s\n", "Warning Label", "Warning Type", "Count");
    os << buf;
    row("Commit Message Rule", "Warning Type Keyword", cm[3]);
    row("", "Warning Context Keyword", cm[2]);
    row("", "Common Keyword", cm[1]);
    row("", "No Matching", cm[0]);
    row("Code Change Rule", "Patch Pattern", cc[2]);
    row("", "Scope Pattern", cc[1]);
    row("", "No Matching", cc[0]);
    row("Aggregated Label", "VTB", cls[3]);
    row("", "LTB", cls[2]);
    row("", "UTB", cls[1]);
    row("", "False Warning", cls[0]);
    return os.str();
}

inline void cmd_label(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto actionable = decode_rows<ActionableWarning>(
        read_jsonl_file(out / artifact::kActionable, schema::kActionable), actionable_from_json, artifact::kActionable);
    auto false_warnings = decode_rows<Survivor>(
        read_jsonl_file(out / artifact::kFalseWarnings, schema::kFalseWarnings), survivor_from_json,
        artifact::kFalseWarnings);
    RevisionSource src(cfg);
    auto entries = label_all(actionable, false_warnings, src);
    write_file_atomic(out / artifact::kDataset, dataset_to_jsonl(entries));
    log << label_summary(entries);
}

inline std::vector<DatasetEntry> synth_from_config(const Config& cfg) {
    SyntheticOptions o;
    o.false_warnings = static_cast<std::size_t>(cfg.integer("synth_false"));
    o.vtb = static_cast<std::size_t>(cfg.integer("synth_vtb"));
    o.ltb = static_cast<std::size_t>(cfg.integer("synth_ltb"));
    o.utb = static_cast<std::size_t>(cfg.integer("synth_utb"));
    o.signal_rate = cfg.real("synth_signal_rate");
    if (o.signal_rate < 0.0 || o.signal_rate > 1.0) throw ConfigError("'synth_signal_rate' must lie in [0, 1]");
    return synthesize_corpus(o, cfg.seed());
}

inline void cmd_synth(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto entries = synth_from_config(cfg);
    std::filesystem::create_directories(out);
    write_file_atomic(out / artifact::kDataset, dataset_to_jsonl(entries));
    log << label_summary(entries);
}

inline std::vector<DatasetEntry> load_dataset(const Config& cfg) {
    auto p = out_dir(cfg) / artifact::kDataset;
    auto text = read_file(p);
    if (!text) throw ArtifactError("missing artifact " + p.string());
    return dataset_from_jsonl(*text, p.string());
}

inline Checkpoint train_model(const std::vector<DatasetEntry>& train, const Encoder& enc, const Hyperparams& hp,
                              std::uint64_t seed, std::ostream* log = nullptr) {
    std::vector<BinaryExample> warm;
    std::vector<MulticlassExample> fine;
    warm.reserve(train.size());
    fine.reserve(train.size());
    for (const auto& e : train) {
        auto x = enc.encode_sparse(e.features);
        warm.push_back({x, e.label != ClassLabel::FalseWarning});
        fine.push_back({std::move(x), e.label, e.cm + e.cc});
    }
    std::vector<double> warm_losses, fine_losses;
    auto p = warmup_train(warm, enc.dim(), hp, seed, &warm_losses);
    p = finetune_train(fine, p, &fine_losses);
    if (log) {
        char buf[96];
        for (std::size_t i = 0; i < warm_losses.size(); ++i) {
            std::snprintf(buf, sizeof buf, "warm-up epoch %zu loss %.6f\n", i + 1, warm_losses[i]);
            *log << buf;
        }
        for (std::size_t i = 0; i < fine_losses.size(); ++i) {
            std::snprintf(buf, sizeof buf, "fine-tune epoch %zu loss %.6f\n", i + 1, fine_losses[i]);
            *log << buf;
        }
    }
    return {std::move(p), enc.name()};
}

inline void cmd_train(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto enc = encoder_from(cfg);
    auto hp = hyperparams_from(cfg);
    auto all = load_dataset(cfg);
    std::vector<DatasetEntry> train;
    split_dataset(all, cfg.seed(), test_fraction(cfg), &train, nullptr);
    log << "training on " << train.size() << " of " << all.size() << " warnings\n";
    auto ckpt = train_model(train, enc, hp, cfg.seed(), &log);
    save_checkpoint(out / artifact::kModel, ckpt);
}

inline void check_compatible(const Checkpoint& c, const Encoder& enc) {
    if (c.encoder != enc.name())
        throw ArtifactError("checkpoint encoder '" + c.encoder + "' does not match '" + enc.name() + "'");
    if (c.params.dim != enc.dim())
        throw ArtifactError("dimension mismatch: checkpoint was trained with encoder_dim " +
                            std::to_string(c.params.dim) + ", config has " + std::to_string(enc.dim()));
}

inline RankedList rank_entries(const Checkpoint& c, const Encoder& enc, const std::vector<DatasetEntry>& entries) {
    check_compatible(c, enc);
    std::vector<RankInput> in;
    in.reserve(entries.size());
    for (const auto& e : entries) in.push_back({e.warning.identity, enc.encode_sparse(e.features)});
    return rank(c.params, in);
}

inline std::string ranked_to_jsonl(const RankedList& ranked) {
    std::vector<json> rows;
    rows.reserve(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) rows.push_back(ranked_to_json(ranked[i], i + 1));
    return write_jsonl(schema::kRanked, rows);
}

inline void cmd_rank(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto enc = encoder_from(cfg);
    auto ckpt = load_checkpoint(out / artifact::kModel);
    check_compatible(ckpt, enc);
    auto all = load_dataset(cfg);
    std::vector<DatasetEntry> test;
    split_dataset(all, cfg.seed(), test_fraction(cfg), nullptr, &test);
    auto ranked = rank_entries(ckpt, enc, test);
    write_file_atomic(out / artifact::kRanked, ranked_to_jsonl(ranked));
    log << "ranked " << ranked.size() << " held-out warnings\n";
}

struct EvalOutput {
    MetricsReport model;
    MetricsReport random;
    GainMode gains = GainMode::Binary;
};

inline GainMode gain_mode_from(const Config& cfg) {
    const auto& g = cfg.str("gains");
    if (g == "binary") return GainMode::Binary;
    if (g == "graded") return GainMode::Graded;
    throw ConfigError("unknown gains '" + g + "' (expected binary or graded)");
}

inline SampleOptions sample_options_from(const Config& cfg) {
    return {static_cast<std::size_t>(cfg.integer("eval_samples", 1)),
            static_cast<std::size_t>(cfg.integer("eval_sample_size", 1)),
            static_cast<std::size_t>(cfg.integer("eval_min_awhb", 0))};
}

inline EvalOutput evaluate_entries(const std::vector<DatasetEntry>& test, const RankedList& ranked,
                                   const SampleOptions& so, GainMode mode, std::uint64_t seed) {
    std::vector<EvalItem> items;
    items.reserve(test.size());
    for (const auto& e : test) items.push_back({e.warning.identity, e.label});
    auto samples = build_samples(items, so, seed);
    EvalOutput o;
    o.gains = mode;
    o.model = evaluate(samples, score_map(ranked), mode);
    o.random = evaluate_random(samples, seed, mode);
    return o;
}

inline std::string metrics_json(const EvalOutput& o) {
    json j = schema_header(schema::kMetrics);
    j["gains"] = o.gains == GainMode::Binary ? "binary" : "graded";
    j["model"] = metrics_to_json(o.model);
    j["random"] = metrics_to_json(o.random);
    return j.dump(2) + "\n";
}

inline void cmd_eval(const Config& cfg, std::ostream& log) {
    auto out = out_dir(cfg);
    auto mode = gain_mode_from(cfg);
    auto so = sample_options_from(cfg);
    auto all = load_dataset(cfg);
    std::vector<DatasetEntry> test;
    split_dataset(all, cfg.seed(), test_fraction(cfg), nullptr, &test);
    auto rows = read_jsonl_file(out / artifact::kRanked, schema::kRanked);
    auto ranked = decode_rows<RankedItem>(rows, ranked_from_json, artifact::kRanked);

    auto o = evaluate_entries(test, ranked, so, mode, cfg.seed());
    auto table = metrics_table({{"reranker", o.model}, {"random", o.random}});
    write_file_atomic(out / artifact::kMetrics, metrics_json(o));
    write_file_atomic(out / artifact::kMetricsTable, table);
    write_file_atomic(out / artifact::kRecallCurve, recall_curve_csv(o.model, &o.random));
    log << table;
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"mine", "label", "train", "rank", "eval", "synth"};
    return names;
}

/// Runs one command, mapping failures to the documented exit codes.
inline int run_command(const std::string& name, const Config& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (name == "mine") cmd_mine(cfg, log);
        else if (name == "label") cmd_label(cfg, log);
        else if (name == "train") cmd_train(cfg, log);
        else if (name == "rank") cmd_rank(cfg, log);
        else if (name == "eval") cmd_eval(cfg, log);
        else if (name == "synth") cmd_synth(cfg, log);
        else throw ConfigError("unknown command '" + name + "'");
        return exit_code::kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_code::kConfig;
    } catch (const ArtifactError& e) {
        err << "artifact error: " << e.what() << "\n";
        return exit_code::kArtifact;
    } catch (const DegenerateData& e) {
        err << "degenerate data: " << e.what() << "\n";
        return exit_code::kDegenerate;
    } catch (const InsufficientData& e) {
        err << "insufficient data: " << e.what() << "\n";
        return exit_code::kDegenerate;
    } catch (const Error& e) {
        err << "data access error: " << e.what() << "\n";
        return exit_code::kDataAccess;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data access error: " << e.what() << "\n";
        return exit_code::kDataAccess;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_code::kInternal;
    }
}

} // namespace warntriage
