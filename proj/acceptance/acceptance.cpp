#include "support/fixtures.hpp"
#include "support/label_examples.hpp"
#include "support/mining_world.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <tuple>

using namespace warntriage;
using namespace wt_test;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

using Triple = std::tuple<Digest, CommitId, CommitId>;

std::vector<Triple> triples(const std::vector<ActionableWarning>& found) {
    std::vector<Triple> out;
    for (const auto& a : found) out.emplace_back(a.warning.identity, a.last_present, a.fix_commit);
    std::sort(out.begin(), out.end());
    return out;
}

Outcome miner_oracle() {
    Outcome o;
    Stopwatch sw;
    Rng rng(1);
    std::size_t found = 0;
    int mismatched = 0;
    for (int trial = 0; trial < 500; ++trial) {
        LinearHistory h;
        auto len = 1 + rng.below(64);
        for (std::size_t i = 0; i < len; ++i) h.commits.push_back("h" + std::to_string(trial) + "_" + std::to_string(i));
        MapRunner runner(monotone_sets(rng, h, rng.below(40)));
        auto fast = triples(binary_search_history(h, runner, nullptr));
        auto slow = triples(exhaustive_scan(h, runner));
        found += slow.size();
        mismatched += fast != slow;
    }
    o.require(mismatched == 0, std::to_string(mismatched) + " of 500 histories differ from the exhaustive scan");
    double t = sw.seconds();
    o.require(t < 10.0, "runtime " + fmt("%.2fs", t) + " >= 10s");
    if (o.pass) o.detail = "500 histories, " + std::to_string(found) + " fixes matched, " + fmt("%.2fs", t);
    return o;
}

Outcome edge_partition(const CommitGraph& g, const std::vector<LinearHistory>& hs) {
    Outcome o;
    auto stripped = stripped_edges(g);
    std::sort(stripped.begin(), stripped.end());
    o.require(history_edges(hs) == stripped, "history edges are not the non-merge edge set");
    for (const auto& h : hs) o.require(!h.commits.empty(), "empty history");
    return o;
}

Outcome linearization() {
    Outcome o;
    CommitGraph g(fig3_nodes());
    auto hs = linearize(g);
    std::vector<std::vector<std::string>> lists;
    for (const auto& h : hs) lists.push_back(h.commits);
    o.require(hs.size() == 4, "expected 4 histories, got " + std::to_string(hs.size()));
    o.require(lists == fig3_expected_histories(), "histories differ from the expected four");
    for (const auto& [from, to] : history_edges(hs))
        o.require(!g.node(to).is_merge(), "merge edge " + from + "->" + to + " kept");
    auto fixture = edge_partition(g, hs);
    o.require(fixture.pass, fixture.detail);

    Rng rng(200);
    int broken = 0;
    for (int i = 0; i < 200; ++i) {
        CommitGraph r(random_dag(rng, 1 + rng.below(60), 1 + static_cast<int>(rng.below(3))));
        broken += !edge_partition(r, linearize(r)).pass;
    }
    o.require(broken == 0, "partition broken on " + std::to_string(broken) + " of 200 random DAGs");
    if (o.pass) o.detail = "4 histories on the fixture, partition holds on 200 random DAGs";
    return o;
}

Outcome labeling() {
    Outcome o;
    auto refactor = refactor_example();
    auto r = label_warning(refactor.warning, refactor.message, parse_unified_diff(refactor.diff));
    o.require(r.cm == 0 && r.cc == 1 && r.aggregate == AggregateLabel::UTB && !r.awhb,
              "refactor fix not UTB/non-AWHB");
    auto leak = socket_leak_example();
    auto l = label_warning(leak.warning, leak.message, parse_unified_diff(leak.diff));
    o.require(l.cm == 3 && l.cc == 2 && l.aggregate == AggregateLabel::VTB && l.awhb, "socket leak fix not VTB/AWHB");
    for (int cm = 0; cm <= 3; ++cm) {
        for (int cc = 0; cc <= 2; ++cc) {
            auto want = cm + cc >= 4 ? AggregateLabel::VTB : cm + cc >= 2 ? AggregateLabel::LTB : AggregateLabel::UTB;
            auto got = aggregate(cm, cc);
            o.require(got.aggregate == want && got.awhb == (want != AggregateLabel::UTB),
                      "pair (" + std::to_string(cm) + "," + std::to_string(cc) + ") misclassified");
        }
    }
    if (o.pass) o.detail = "refactor UTB (0,1), socket leak VTB (3,2), 12/12 pairs";
    return o;
}

Outcome ranking_fidelity() {
    Outcome o;
    double vtb = ranking_score({0.1, 0.1, 0.2, 0.6});
    double fw = ranking_score({0.7, 0.1, 0.1, 0.1});
    o.require(vtb == 3.6, "VTB score " + fmt("%.17g", vtb) + " != 3.6");
    o.require(fw == -0.7, "false warning score " + fmt("%.17g", fw) + " != -0.7");

    // Each predicted class owns a score interval above every lower class.
    const double lo[] = {-1.0, 1.25, 2.25, 3.25}, hi[] = {-0.25, 2.0, 3.0, 4.0};
    Rng rng(10000);
    for (int i = 0; i < 10000; ++i) {
        ClassProbs p{};
        double sum = 0.0;
        for (auto& v : p) sum += v = std::exp(rng.uniform(-4.0, 4.0));
        for (auto& v : p) v /= sum;
        auto c = static_cast<std::size_t>(predicted_class(p));
        double s = ranking_score(p);
        if (!(s >= lo[c] && s <= hi[c])) {
            o.require(false, "score " + fmt("%.6f", s) + " outside its class interval");
            break;
        }
    }
    if (o.pass) o.detail = "3.6 and -0.7 exact, 10000 vectors separated";
    return o;
}

Outcome gradients() {
    Outcome o;
    Stopwatch sw;
    Rng rng(5);
    double worst_binary = 0.0, worst_multi = 0.0;
    for (int i = 0; i < 50; ++i) worst_binary = std::max(worst_binary, gradient_probe(rng, 2));
    for (int i = 0; i < 50; ++i) worst_multi = std::max(worst_multi, gradient_probe(rng, 4));
    double t = sw.seconds();
    o.require(worst_binary < 1e-4, "warm-up loss relative error " + fmt("%.3g", worst_binary));
    o.require(worst_multi < 1e-4, "fine-tuning loss relative error " + fmt("%.3g", worst_multi));
    o.require(t < 30.0, "runtime " + fmt("%.2fs", t) + " >= 30s");
    if (o.pass)
        o.detail = "100 probes, worst relative error " + fmt("%.2e", std::max(worst_binary, worst_multi)) + ", " +
                   fmt("%.2fs", t);
    return o;
}

Outcome metric_correctness() {
    Outcome o;
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 8; ++n) {
        for (std::size_t mask = 0; mask < (1u << n); ++mask) {
            std::vector<double> gains(n);
            for (std::size_t i = 0; i < n; ++i) gains[i] = (mask >> i) & 1u ? 1.0 : 0.0;
            for (std::size_t k = 1; k <= n; ++k, ++cases)
                worst = std::max(worst, std::abs(ndcg_at_k(gains, k) - ndcg_brute_force(gains, k)));
        }
    }
    o.require(worst <= 1e-12, "max deviation from brute force " + fmt("%.3g", worst));
    // Four-decimal agreement in the assert_almost_equal sense: |actual - desired| < 1.5e-4.
    double worked = ndcg_at_k(std::vector<double>{0, 1, 0, 1, 0}, 5);
    o.require(std::abs(worked - 0.6510) < 1.5e-4, "ranks {2,4} of 5 give " + fmt("%.6f", worked));
    if (o.pass)
        o.detail = std::to_string(cases) + " lists, max deviation " + fmt("%.1e", worst) + ", ranks {2,4} of 5 give " +
                   fmt("%.6f", worked);
    return o;
}

struct SyntheticRun {
    EvalOutput eval;
    std::size_t awhb = 0, actionable = 0, false_warnings = 0;
    double seconds = 0.0;
};

SyntheticRun synthetic_run() {
    Stopwatch sw;
    SyntheticRun r;
    const std::uint64_t seed = 42;
    auto entries = synthesize_corpus(SyntheticOptions{}, seed);
    for (const auto& e : entries) {
        r.false_warnings += e.label == ClassLabel::FalseWarning;
        r.actionable += e.label != ClassLabel::FalseWarning;
        r.awhb += e.label == ClassLabel::VTB || e.label == ClassLabel::LTB;
    }
    std::vector<DatasetEntry> train, test;
    split_dataset(entries, seed, 0.2, &train, &test);
    HashingEncoder enc;
    auto ckpt = train_model(train, enc, Hyperparams{}, seed);
    auto ranked = rank_entries(ckpt, enc, test);
    r.eval = evaluate_entries(test, ranked, SampleOptions{100, 1000, 5}, GainMode::Binary, seed);
    r.seconds = sw.seconds();
    return r;
}

Outcome synthetic_ordering(const SyntheticRun& r) {
    Outcome o;
    double model5 = r.eval.model.ndcg.at(5), rand5 = r.eval.random.ndcg.at(5);
    o.require(model5 >= 0.9, "reranker nDCG@5 " + fmt("%.4f", model5) + " < 0.9");
    o.require(r.eval.model.mrr >= 0.8, "reranker MRR " + fmt("%.4f", r.eval.model.mrr) + " < 0.8");
    o.require(rand5 <= 0.2, "random nDCG@5 " + fmt("%.4f", rand5) + " > 0.2");
    o.require(r.eval.random.mrr <= 0.2, "random MRR " + fmt("%.4f", r.eval.random.mrr) + " > 0.2");
    o.require(r.seconds < 180.0, "runtime " + fmt("%.1fs", r.seconds) + " >= 180s");
    if (o.pass) {
        std::ostringstream os;
        os << r.false_warnings << " false / " << r.actionable << " actionable / " << r.awhb << " AWHB; reranker nDCG@5 "
           << fmt("%.4f", model5) << " MRR " << fmt("%.4f", r.eval.model.mrr) << "; random nDCG@5 "
           << fmt("%.4f", rand5) << " MRR " << fmt("%.4f", r.eval.random.mrr) << "; " << fmt("%.1fs", r.seconds);
        o.detail = os.str();
    }
    return o;
}

Outcome recall_shape(const SyntheticRun& r) {
    Outcome o;
    double rec = r.eval.model.recall_at_percent.at(5);
    o.require(rec >= 0.5, "Recall@Top-5% " + fmt("%.4f", rec) + " < 0.5");
    if (o.pass) o.detail = "Recall@Top-5% " + fmt("%.4f", rec);
    return o;
}

std::map<std::string, std::string> run_pipeline(const MiningWorld& world, const std::filesystem::path& out,
                                                const std::string& extra, Outcome& o) {
    auto cfg = Config::parse(mining_world_config(world, out, extra));
    std::ostringstream log, err;
    for (const char* c : {"mine", "label", "train", "rank", "eval"}) {
        int code = run_command(c, cfg, log, err);
        if (code != 0) o.require(false, std::string(c) + " exited " + std::to_string(code) + ": " + err.str());
    }
    std::map<std::string, std::string> files;
    if (std::filesystem::exists(out))
        for (const auto& e : std::filesystem::directory_iterator(out))
            files[e.path().filename().string()] = slurp(e.path());
    return files;
}

Outcome determinism() {
    Outcome o;
    TempDir dir;
    auto world = make_mining_world(dir / "world");
    auto a = run_pipeline(world, dir / "a", "seed = 11\n", o);
    auto b = run_pipeline(world, dir / "b", "seed = 11\n", o);
    auto c = run_pipeline(world, dir / "c", "seed = 11\njobs = 4\n", o);
    o.require(a.size() == 8, "expected 8 artifacts, found " + std::to_string(a.size()));
    o.require(a == b, "repeated run produced different artifacts");
    o.require(a == c, "parallel mining produced different artifacts");
    if (o.pass) {
        std::size_t bytes = 0;
        for (const auto& [name, text] : a) bytes += text.size();
        o.detail = "8 artifacts (" + std::to_string(bytes) + " bytes) identical across 3 runs";
    }
    return o;
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](const char* id, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.pass;
        std::printf("%s %s %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    report("AC1", "miner oracle equivalence", miner_oracle);
    report("AC2", "linearization structure", linearization);
    report("AC3", "labeling regression", labeling);
    report("AC4", "ranking-score fidelity", ranking_fidelity);
    report("AC5", "gradient checks", gradients);
    report("AC6", "metric correctness", metric_correctness);

    std::optional<SyntheticRun> synth;
    std::string synth_error;
    try {
        synth = synthetic_run();
    } catch (const std::exception& e) {
        synth_error = e.what();
    }
    auto with_synth = [&](Outcome (*f)(const SyntheticRun&)) {
        return [&, f]() -> Outcome {
            if (!synth) return {false, "synthetic run failed: " + synth_error};
            return f(*synth);
        };
    };
    report("AC7", "synthetic end-to-end ordering", with_synth(synthetic_ordering));
    report("AC8", "recall-curve shape", with_synth(recall_shape));
    report("AC9", "determinism", determinism);

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
