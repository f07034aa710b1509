#pragma once

#include "warntriage/record_json.hpp"
#include "warntriage/warning.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warntriage {

struct RawReport {
    Tool tool = Tool::Infer;
    std::string payload;
};

/// Returns the exact source line (untrimmed is fine) for file:line, if known.
using SourceLookup = std::function<std::optional<std::string>(const std::string& file, int line)>;

inline constexpr int kDefaultFlawfinderLevel = 4;

inline std::optional<WarningType> map_infer_bug_type(std::string_view bug_type) {
    if (bug_type == "UNINITIALIZED_VALUE" || bug_type == "UNINITIALIZED_VARIABLE")
        return WarningType::UninitializedVariable;
    if (bug_type == "NULL_DEREFERENCE") return WarningType::NullDereference;
    if (bug_type == "RESOURCE_LEAK" || bug_type == "MEMORY_LEAK") return WarningType::ResourceLeak;
    if (bug_type == "DEAD_STORE") return WarningType::DeadStore;
    return std::nullopt;
}

/// Parses Infer's report.json. Out-of-scope bug types are dropped; a retained
/// entry lacking bug_type/qualifier/file/procedure/line is a MalformedReport.
inline std::vector<WarningRecord> parse_infer_report(std::string_view payload,
                                                     const SourceLookup& source = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(payload.begin(), payload.end());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport(std::string("infer report is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MalformedReport("infer report must be a JSON array");

    std::vector<WarningRecord> out;
    std::size_t index = 0;
    for (const auto& entry : doc) {
        auto where = "infer entry " + std::to_string(index++);
        if (!entry.is_object()) throw MalformedReport(where + " is not an object");
        auto bt = entry.find("bug_type");
        if (bt == entry.end() || !bt->is_string())
            throw MalformedReport(where + " lacks bug_type");
        auto wtype = map_infer_bug_type(bt->get<std::string>());
        if (!wtype) continue;

        auto str = [&](const char* key) {
            auto it = entry.find(key);
            if (it == entry.end() || !it->is_string())
                throw MalformedReport(where + " lacks string field '" + key + "'");
            return it->get<std::string>();
        };
        auto ln = entry.find("line");
        if (ln == entry.end() || !ln->is_number_integer())
            throw MalformedReport(where + " lacks integer field 'line'");
        std::optional<int> column;
        if (auto c = entry.find("column"); c != entry.end() && c->is_number_integer())
            column = c->get<int>();

        auto file = str("file");
        int line = ln->get<int>();
        std::string context;
        if (source)
            if (auto text = source(file, line)) context = *text;
        out.push_back(make_record(Tool::Infer, *wtype, std::move(file), line, column,
                                  str("procedure"), str("qualifier"), std::move(context)));
    }
    return out;
}

namespace detail {

/// RFC 4180 CSV: quoted fields, doubled quotes, embedded newlines.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };

    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                    throw MalformedReport("CSV: garbage after closing quote");
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            quoted = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' || c == '\n') {
            end_row();
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            ++i;
        } else {
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (quoted) throw MalformedReport("CSV: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

inline std::optional<int> parse_int(const std::string& s) {
    auto t = trim(s);
    if (t.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
        int v = std::stoi(t, &used);
        if (used != t.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace detail

/// Parses `flawfinder --csv` output, keeping buffer-category rows at or above
/// min_level. The qualifier is "`<Name>`: <Warning>" when a Name column exists.
inline std::vector<WarningRecord> parse_flawfinder_report(std::string_view payload,
                                                          int min_level = kDefaultFlawfinderLevel) {
    auto rows = detail::parse_csv(payload);
    if (rows.empty()) throw MalformedReport("flawfinder CSV has no header");

    const auto& header = rows.front();
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[detail::trim(header[i])] = i;
    for (const char* need : {"File", "Line", "Column", "Level", "Category", "Warning", "Context"})
        if (!col.count(need))
            throw MalformedReport(std::string("flawfinder CSV header lacks column '") + need + "'");
    std::optional<std::size_t> name_col;
    if (col.count("Name")) name_col = col["Name"];

    std::vector<WarningRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto where = "flawfinder row " + std::to_string(r);
        if (row.size() != header.size())
            throw MalformedReport(where + " has " + std::to_string(row.size()) +
                                  " fields, header has " + std::to_string(header.size()));
        auto level = detail::parse_int(row[col["Level"]]);
        if (!level) throw MalformedReport(where + " has non-integer Level");
        if (*level < min_level) continue;
        if (detail::to_lower(row[col["Category"]]).find("buffer") == std::string::npos) continue;

        auto line = detail::parse_int(row[col["Line"]]);
        if (!line) throw MalformedReport(where + " has non-integer Line");
        auto column = detail::parse_int(row[col["Column"]]);

        std::string qualifier = row[col["Warning"]];
        if (name_col && !detail::trim(row[*name_col]).empty())
            qualifier = "`" + detail::trim(row[*name_col]) + "`: " + qualifier;

        out.push_back(make_record(Tool::Flawfinder, WarningType::BufferOverflow,
                                  row[col["File"]], *line, column, "", std::move(qualifier),
                                  row[col["Context"]]));
    }
    return out;
}

/// Tool-name keyed parsers; new analyzers plug in with register_adapter().
class AdapterRegistry {
public:
    using Parser = std::function<std::vector<WarningRecord>(std::string_view payload)>;

    static AdapterRegistry with_defaults(SourceLookup source = {}) {
        AdapterRegistry reg;
        reg.register_adapter("infer", [source](std::string_view p) {
            return parse_infer_report(p, source);
        });
        reg.register_adapter("flawfinder", [](std::string_view p) {
            return parse_flawfinder_report(p);
        });
        return reg;
    }

    void register_adapter(std::string name, Parser parser) {
        parsers_[std::move(name)] = std::move(parser);
    }

    bool has(const std::string& name) const { return parsers_.count(name) != 0; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : parsers_) out.push_back(k);
        return out;
    }

    std::vector<WarningRecord> parse(const std::string& name, std::string_view payload) const {
        auto it = parsers_.find(name);
        if (it == parsers_.end()) throw MalformedReport("no adapter registered for tool '" + name + "'");
        return it->second(payload);
    }

    std::vector<WarningRecord> parse(const RawReport& report) const {
        return parse(detail::to_lower(to_string(report.tool)), report.payload);
    }

private:
    std::map<std::string, Parser> parsers_;
};

} // namespace warntriage
