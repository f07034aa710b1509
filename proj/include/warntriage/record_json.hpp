#pragma once

#include "warntriage/warning.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace warntriage {

using json = nlohmann::ordered_json;

/// Replay/JSONL shape: tool, wtype, file, line, column, procedure, qualifier,
/// context_code. The identity is never trusted from disk; it is recomputed.
inline json record_to_json(const WarningRecord& r) {
    json j;
    j["tool"] = std::string(to_string(r.tool));
    j["wtype"] = std::string(to_string(r.wtype));
    j["file"] = r.file;
    j["line"] = r.line;
    j["column"] = r.column ? json(*r.column) : json(nullptr);
    j["procedure"] = r.procedure;
    j["qualifier"] = r.qualifier;
    j["context_code"] = r.context_code;
    return j;
}

inline WarningRecord record_from_json(const json& j) {
    auto need_string = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j[key].is_string())
            throw MalformedReport(std::string("record field '") + key + "' missing or not a string");
        return j[key].get<std::string>();
    };
    auto tool = parse_tool(need_string("tool"));
    if (!tool) throw MalformedReport("unknown tool '" + j["tool"].get<std::string>() + "'");
    auto wtype = parse_warning_type(need_string("wtype"));
    if (!wtype) throw MalformedReport("unknown wtype '" + j["wtype"].get<std::string>() + "'");
    if (!j.contains("line") || !j["line"].is_number_integer())
        throw MalformedReport("record field 'line' missing or not an integer");
    std::optional<int> column;
    if (j.contains("column") && j["column"].is_number_integer()) column = j["column"].get<int>();
    std::string procedure = j.contains("procedure") && j["procedure"].is_string()
                                ? j["procedure"].get<std::string>()
                                : std::string{};
    return make_record(*tool, *wtype, need_string("file"), j["line"].get<int>(), column,
                       std::move(procedure), need_string("qualifier"),
                       need_string("context_code"));
}

/// Parses JSONL text; blank lines are skipped.
inline std::vector<WarningRecord> records_from_jsonl(std::string_view text) {
    std::vector<WarningRecord> out;
    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
            try {
                out.push_back(record_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                throw MalformedReport("JSONL line " + std::to_string(lineno) + ": " + e.what());
            } catch (const MalformedReport& e) {
                throw MalformedReport("JSONL line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

inline std::string records_to_jsonl(const std::vector<WarningRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

} // namespace warntriage
