#pragma once

#include "warntriage/artifacts.hpp"
#include "warntriage/rng.hpp"
#include "warntriage/warning.hpp"

#include <array>
#include <set>
#include <string>
#include <vector>

namespace warntriage {

/// Class sizes default to the proportions of the mined C corpus: ~40k false
/// warnings, ~1.9k actionable of which ~290 are AWHB.
struct SyntheticOptions {
    std::size_t false_warnings = 40000;
    std::size_t vtb = 151;
    std::size_t ltb = 139;
    std::size_t utb = 1610;
    /// Probability that an actionable entry carries its class token.
    double signal_rate = 1.0;
};

namespace detail {

inline const std::vector<std::string>& synth_words() {
    static const std::vector<std::string> w = {
        "buf",  "len",  "ctx",   "node", "list", "entry", "conn", "req",  "resp", "str",  "data", "item",
        "path", "name", "count", "idx",  "size", "ptr",   "head", "tail", "msg",  "key",  "val",  "tmp",
        "cfg",  "fd",   "file",  "sock", "pkt",  "hdr",   "tbl",  "map",  "ref",  "obj",  "opt",  "arg"};
    return w;
}

inline const std::vector<std::string>& synth_verbs() {
    static const std::vector<std::string> v = {"init", "parse", "read",  "write", "alloc", "free",  "load", "save",
                                               "open", "close", "check", "build", "copy",  "merge", "find", "emit"};
    return v;
}

inline const std::vector<std::string>& synth_modules() {
    static const std::vector<std::string> m = {"core", "net", "io", "util", "parser", "crypto", "db", "http", "fs"};
    return m;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

inline std::string class_token(ClassLabel c) {
    switch (c) {
    case ClassLabel::VTB: return "sig_vtb";
    case ClassLabel::LTB: return "sig_ltb";
    case ClassLabel::UTB: return "sig_utb";
    case ClassLabel::FalseWarning: break;
    }
    return "";
}

inline std::string hex_id(Rng& rng) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    for (int i = 0; i < 40; ++i) s += kHex[rng.below(16)];
    return s;
}

inline std::string synth_qualifier(WarningType t, const std::string& var, const std::string& fn, int line) {
    switch (t) {
    case WarningType::NullDereference:
        return "pointer `" + var + "` last assigned on line " + std::to_string(line - 2) +
               " could be null and is dereferenced at line " + std::to_string(line) + ".";
    case WarningType::UninitializedVariable:
        return "The value read from " + var + " was never initialized.";
    case WarningType::ResourceLeak:
        return "resource acquired to `" + var + "` by call to `" + fn + "()` at line " + std::to_string(line - 3) +
               " is not released after line " + std::to_string(line) + ".";
    case WarningType::DeadStore:
        return "The value written to &" + var + " is never used.";
    case WarningType::BufferOverflow:
        return "`" + fn + "`: Does not check for buffer overflows when copying to destination.";
    }
    return "";
}

inline std::string synth_statement(WarningType t, const std::string& var, const std::string& fn) {
    switch (t) {
    case WarningType::NullDereference: return var + "->next = " + fn + "(" + var + ");";
    case WarningType::UninitializedVariable: return "total += " + var + ";";
    case WarningType::ResourceLeak: return "return " + fn + "(" + var + ");";
    case WarningType::DeadStore: return var + " = " + fn + "(ctx);";
    case WarningType::BufferOverflow: return fn + "(" + var + ", src);";
    }
    return "";
}

inline std::pair<int, int> synth_scores(ClassLabel c, Rng& rng) {
    static const std::vector<std::pair<int, int>> vtb = {{3, 1}, {3, 2}, {2, 2}};
    static const std::vector<std::pair<int, int>> ltb = {{2, 0}, {3, 0}, {1, 1}, {2, 1}, {1, 2}, {0, 2}};
    static const std::vector<std::pair<int, int>> utb = {{0, 0}, {1, 0}, {0, 1}};
    switch (c) {
    case ClassLabel::VTB: return pick(vtb, rng);
    case ClassLabel::LTB: return pick(ltb, rng);
    case ClassLabel::UTB: return pick(utb, rng);
    case ClassLabel::FalseWarning: break;
    }
    return {0, 0};
}

} // namespace detail

/// Labeled corpus whose actionable classes carry a class-indicative token in
/// their code context. Entries are returned in a seeded random order.
inline std::vector<DatasetEntry> synthesize_corpus(const SyntheticOptions& opts, std::uint64_t seed) {
    using namespace detail;
    Rng rng(derive_seed(seed, 77));
    std::vector<ClassLabel> plan;
    plan.insert(plan.end(), opts.false_warnings, ClassLabel::FalseWarning);
    plan.insert(plan.end(), opts.utb, ClassLabel::UTB);
    plan.insert(plan.end(), opts.ltb, ClassLabel::LTB);
    plan.insert(plan.end(), opts.vtb, ClassLabel::VTB);

    static const std::vector<std::string> headers = {
        "if (ctx != NULL)", "for (i = 0; i < n; i++)", "while (p != NULL)", "if (len > 0)", "switch (kind)",
        "if (flags & MODE_RW)", "do"};

    std::set<Digest> seen;
    std::vector<DatasetEntry> out;
    out.reserve(plan.size());
    for (auto label : plan) {
        for (;;) {
            auto wtype = kAllWarningTypes[static_cast<std::size_t>(rng.below(kAllWarningTypes.size()))];
            auto tool = wtype == WarningType::BufferOverflow ? Tool::Flawfinder : Tool::Infer;
            std::string var = pick(synth_words(), rng) + "_" + std::to_string(rng.below(1000));
            std::string callee = pick(synth_verbs(), rng) + "_" + pick(synth_words(), rng);
            if (wtype == WarningType::BufferOverflow) callee = rng.below(2) ? "strcpy" : "strcat";
            std::string proc = pick(synth_verbs(), rng) + "_" + pick(synth_words(), rng);
            std::string file = "src/" + pick(synth_modules(), rng) + "/" + pick(synth_words(), rng) + ".c";
            int line = 10 + static_cast<int>(rng.below(900));

            std::string statement = synth_statement(wtype, var, callee);
            bool signal = label != ClassLabel::FalseWarning && rng.uniform() < opts.signal_rate;
            if (signal) statement = "/* " + class_token(label) + " */ " + statement;

            auto rec = make_record(tool, wtype, file, line, std::nullopt, tool == Tool::Infer ? proc : "",
                                   synth_qualifier(wtype, var, callee, line), statement);
            if (!seen.insert(rec.identity).second) continue;

            DatasetEntry e;
            e.warning = rec;
            e.label = label;
            if (label != ClassLabel::FalseWarning) {
                auto [cm, cc] = synth_scores(label, rng);
                e.cm = cm;
                e.cc = cc;
                e.fix_commit = hex_id(rng);
            }
            CodeInput code;
            code.statement = statement;
            auto depth = rng.below(3);
            for (std::uint64_t d = 0; d < depth; ++d) code.control_flow.push_back(pick(headers, rng));
            code.parent = code.control_flow.empty() ? "" : code.control_flow.back();
            e.features = {text_features(rec), code};
            out.push_back(std::move(e));
            break;
        }
    }
    rng.shuffle(out);
    return out;
}

} // namespace warntriage
