#pragma once

#include "warntriage/commit_graph.hpp"
#include "warntriage/error.hpp"
#include "warntriage/features.hpp"
#include "warntriage/labeler.hpp"
#include "warntriage/miner.hpp"
#include "warntriage/model.hpp"
#include "warntriage/process.hpp"
#include "warntriage/record_json.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace warntriage {

inline constexpr int kSchemaVersion = 1;

namespace schema {
inline constexpr const char* kActionable = "warntriage.actionable";
inline constexpr const char* kFalseWarnings = "warntriage.false_warnings";
inline constexpr const char* kDataset = "warntriage.dataset";
inline constexpr const char* kRanked = "warntriage.ranked";
inline constexpr const char* kMetrics = "warntriage.metrics";
} // namespace schema

inline json schema_header(const std::string& name) { return {{"schema", name}, {"version", kSchemaVersion}}; }

/// Header line followed by one compact JSON object per line.
inline std::string write_jsonl(const std::string& schema_name, const std::vector<json>& rows) {
    std::string out = schema_header(schema_name).dump() + "\n";
    for (const auto& r : rows) out += r.dump() + "\n";
    return out;
}

inline std::vector<json> parse_jsonl(std::string_view text, const std::string& schema_name,
                                     const std::string& where) {
    std::vector<json> rows;
    bool header = false;
    std::size_t pos = 0, lineno = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ArtifactError(where + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!header) {
            if (!j.is_object() || j.value("schema", "") != schema_name)
                throw ArtifactError(where + ": expected schema '" + schema_name + "'");
            if (j.value("version", -1) != kSchemaVersion)
                throw ArtifactError(where + ": unsupported schema version");
            header = true;
            continue;
        }
        rows.push_back(std::move(j));
    }
    if (!header) throw ArtifactError(where + ": missing schema header");
    return rows;
}

inline std::vector<json> read_jsonl_file(const std::filesystem::path& p, const std::string& schema_name) {
    auto text = read_file(p);
    if (!text) throw ArtifactError("missing artifact " + p.string());
    return parse_jsonl(*text, schema_name, p.string());
}

/// Wraps a per-row decoder so decoding failures surface as ArtifactError.
template <typename T>
std::vector<T> decode_rows(const std::vector<json>& rows, const std::function<T(const json&)>& f,
                           const std::string& where) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(f(rows[i]));
        } catch (const json::exception& e) {
            throw ArtifactError(where + " row " + std::to_string(i + 1) + ": " + e.what());
        } catch (const MalformedReport& e) {
            throw ArtifactError(where + " row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

inline json actionable_to_json(const ActionableWarning& a) {
    json j = record_to_json(a.warning);
    j["identity"] = digest_hex(a.warning.identity);
    j["last_present"] = a.last_present;
    j["fix_commit"] = a.fix_commit;
    return j;
}

inline ActionableWarning actionable_from_json(const json& j) {
    return {record_from_json(j), j.at("last_present").get<std::string>(), j.at("fix_commit").get<std::string>()};
}

inline json survivor_to_json(const Survivor& s) {
    json j = record_to_json(s.warning);
    j["identity"] = digest_hex(s.warning.identity);
    j["first_seen"] = s.first_seen;
    j["tip"] = s.tip;
    return j;
}

inline Survivor survivor_from_json(const json& j) {
    return {record_from_json(j), j.at("first_seen").get<std::int64_t>(), j.at("tip").get<std::string>()};
}

struct DatasetEntry {
    WarningRecord warning;
    ClassLabel label = ClassLabel::FalseWarning;
    int cm = 0;
    int cc = 0;
    std::optional<CommitId> fix_commit;
    FeatureBundle features;

    bool awhb() const { return label == ClassLabel::VTB || label == ClassLabel::LTB; }
    friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

inline ClassLabel class_of(AggregateLabel a) {
    switch (a) {
    case AggregateLabel::UTB: return ClassLabel::UTB;
    case AggregateLabel::LTB: return ClassLabel::LTB;
    case AggregateLabel::VTB: return ClassLabel::VTB;
    }
    return ClassLabel::UTB;
}

/// Actionable entries must carry the label their (cm, cc) aggregate to;
/// false warnings carry zero scores and no fix commit.
inline void check_entry(const DatasetEntry& e) {
    if (e.label == ClassLabel::FalseWarning) {
        if (e.cm != 0 || e.cc != 0 || e.fix_commit)
            throw ArtifactError("false warning " + digest_hex(e.warning.identity) + " has weak scores or a fix commit");
        return;
    }
    WeakLabel w;
    try {
        w = aggregate(e.cm, e.cc);
    } catch (const std::invalid_argument& ex) {
        throw ArtifactError(ex.what());
    }
    if (class_of(w.aggregate) != e.label)
        throw ArtifactError("entry " + digest_hex(e.warning.identity) + " label disagrees with its weak scores");
}

inline json features_to_json(const FeatureBundle& b) {
    return {{"text",
             {{"bug_type", b.text.bug_type},
              {"qualifier", b.text.qualifier},
              {"procedure", b.text.procedure},
              {"filename", b.text.filename}}},
            {"code", {{"statement", b.code.statement}, {"parent", b.code.parent}, {"control_flow", b.code.control_flow}}}};
}

inline FeatureBundle features_from_json(const json& j) {
    FeatureBundle b;
    const auto& t = j.at("text");
    b.text = {t.at("bug_type").get<std::string>(), t.at("qualifier").get<std::string>(),
              t.at("procedure").get<std::string>(), t.at("filename").get<std::string>()};
    const auto& c = j.at("code");
    b.code = {c.at("statement").get<std::string>(), c.at("parent").get<std::string>(),
              c.at("control_flow").get<std::vector<std::string>>()};
    return b;
}

inline json entry_to_json(const DatasetEntry& e) {
    json j = record_to_json(e.warning);
    j["identity"] = digest_hex(e.warning.identity);
    j["label"] = std::string(to_string(e.label));
    j["cm"] = e.cm;
    j["cc"] = e.cc;
    j["fix_commit"] = e.fix_commit ? json(*e.fix_commit) : json(nullptr);
    j["features"] = features_to_json(e.features);
    return j;
}

inline DatasetEntry entry_from_json(const json& j) {
    DatasetEntry e;
    e.warning = record_from_json(j);
    auto label = parse_class_label(j.at("label").get<std::string>());
    if (!label) throw ArtifactError("unknown label '" + j.at("label").get<std::string>() + "'");
    e.label = *label;
    e.cm = j.at("cm").get<int>();
    e.cc = j.at("cc").get<int>();
    if (j.contains("fix_commit") && j["fix_commit"].is_string()) e.fix_commit = j["fix_commit"].get<std::string>();
    e.features = features_from_json(j.at("features"));
    check_entry(e);
    return e;
}

inline std::string dataset_to_jsonl(const std::vector<DatasetEntry>& entries) {
    std::vector<json> rows;
    rows.reserve(entries.size());
    for (const auto& e : entries) rows.push_back(entry_to_json(e));
    return write_jsonl(schema::kDataset, rows);
}

inline std::vector<DatasetEntry> dataset_from_jsonl(std::string_view text, const std::string& where = "dataset") {
    return decode_rows<DatasetEntry>(parse_jsonl(text, schema::kDataset, where), entry_from_json, where);
}

inline json ranked_to_json(const RankedItem& r, std::size_t position) {
    return {{"rank", position},
            {"identity", digest_hex(r.identity)},
            {"score", r.score},
            {"predicted", std::string(to_string(r.predicted))},
            {"probability", r.probability}};
}

inline RankedItem ranked_from_json(const json& j) {
    RankedItem r;
    auto id = parse_digest_hex(j.at("identity").get<std::string>());
    if (!id) throw ArtifactError("bad identity in ranked list");
    r.identity = *id;
    r.score = j.at("score").get<double>();
    auto c = parse_class_label(j.at("predicted").get<std::string>());
    if (!c) throw ArtifactError("bad predicted class in ranked list");
    r.predicted = *c;
    r.probability = j.at("probability").get<double>();
    return r;
}

} // namespace warntriage
