#pragma once

#include "warntriage/error.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace warntriage {

enum class Tool { Infer, Flawfinder };

enum class WarningType {
    UninitializedVariable,
    NullDereference,
    ResourceLeak,
    DeadStore,
    BufferOverflow,
};

inline constexpr std::array<WarningType, 5> kAllWarningTypes = {
    WarningType::UninitializedVariable, WarningType::NullDereference,
    WarningType::ResourceLeak, WarningType::DeadStore,
    WarningType::BufferOverflow};

using Digest = std::uint64_t;

inline std::string_view to_string(Tool t) {
    return t == Tool::Infer ? "Infer" : "Flawfinder";
}

inline std::optional<Tool> parse_tool(std::string_view s) {
    if (s == "Infer" || s == "infer") return Tool::Infer;
    if (s == "Flawfinder" || s == "flawfinder") return Tool::Flawfinder;
    return std::nullopt;
}

/// Stable identifier used in every serialized artifact.
inline std::string_view to_string(WarningType t) {
    switch (t) {
    case WarningType::UninitializedVariable: return "UninitializedVariable";
    case WarningType::NullDereference: return "NullDereference";
    case WarningType::ResourceLeak: return "ResourceLeak";
    case WarningType::DeadStore: return "DeadStore";
    case WarningType::BufferOverflow: return "BufferOverflow";
    }
    return "";
}

/// Human-readable label, as fed to the encoder.
inline std::string_view display_label(WarningType t) {
    switch (t) {
    case WarningType::UninitializedVariable: return "Uninitialized Variable";
    case WarningType::NullDereference: return "Null Dereference";
    case WarningType::ResourceLeak: return "Resource Leak";
    case WarningType::DeadStore: return "Dead Store";
    case WarningType::BufferOverflow: return "Buffer Overflow";
    }
    return "";
}

inline std::optional<WarningType> parse_warning_type(std::string_view s) {
    for (auto t : kAllWarningTypes)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

/// One static-analysis warning. Build with make_record() so the identity
/// and the line/file invariants are established at construction.
struct WarningRecord {
    Tool tool = Tool::Infer;
    WarningType wtype = WarningType::NullDereference;
    std::string file;
    int line = 1;
    std::optional<int> column;
    std::string procedure;
    std::string qualifier;
    std::string context_code;
    Digest identity = 0;

    friend bool operator==(const WarningRecord&, const WarningRecord&) = default;
};

struct QualifierSlots {
    std::optional<std::string> variable;
    std::optional<std::string> pointer;
    std::optional<std::string> function;
    std::vector<int> lines;

    bool empty() const {
        return !variable && !pointer && !function && lines.empty();
    }
    friend bool operator==(const QualifierSlots&, const QualifierSlots&) = default;
};

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace detail

/// 64-bit FNV-1a over "<wtype>\x1f<file>\x1f<procedure>\x1f<context_code>".
/// The type contributes its stable name from to_string(WarningType).
inline Digest compute_identity(WarningType wtype, std::string_view file,
                               std::string_view procedure,
                               std::string_view context_code) {
    constexpr std::string_view sep = "\x1f";
    std::uint64_t h = detail::fnv1a(to_string(wtype));
    h = detail::fnv1a(sep, h);
    h = detail::fnv1a(file, h);
    h = detail::fnv1a(sep, h);
    h = detail::fnv1a(procedure, h);
    h = detail::fnv1a(sep, h);
    return detail::fnv1a(context_code, h);
}

inline Digest compute_identity(const WarningRecord& r) {
    return compute_identity(r.wtype, r.file, r.procedure, r.context_code);
}

inline std::string digest_hex(Digest d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[d & 0xF];
        d >>= 4;
    }
    return out;
}

inline std::optional<Digest> parse_digest_hex(std::string_view s) {
    if (s.size() != 16) return std::nullopt;
    Digest d = 0;
    for (char c : s) {
        d <<= 4;
        if (c >= '0' && c <= '9') d |= static_cast<Digest>(c - '0');
        else if (c >= 'a' && c <= 'f') d |= static_cast<Digest>(c - 'a' + 10);
        else return std::nullopt;
    }
    return d;
}

/// Validates the record invariants, trims context_code and fills identity.
inline WarningRecord make_record(Tool tool, WarningType wtype, std::string file, int line,
                                 std::optional<int> column, std::string procedure,
                                 std::string qualifier, std::string context_code) {
    if (file.empty()) throw MalformedReport("warning record has an empty file path");
    if (line < 1)
        throw MalformedReport("warning record " + file + " has non-positive line " +
                              std::to_string(line));
    if (column && *column < 1) column.reset();
    WarningRecord r;
    r.tool = tool;
    r.wtype = wtype;
    r.file = std::move(file);
    r.line = line;
    r.column = column;
    r.procedure = std::move(procedure);
    r.qualifier = std::move(qualifier);
    r.context_code = detail::trim(context_code);
    r.identity = compute_identity(r);
    return r;
}

/// Removes repeated identities (first occurrence wins) and cross-tool
/// duplicates at the same (file, line). When an Infer and a Flawfinder record
/// collide, the Infer record survives and takes the earlier slot.
inline std::vector<WarningRecord> dedup(const std::vector<WarningRecord>& records) {
    std::vector<WarningRecord> out;
    std::vector<bool> removed;
    std::unordered_set<Digest> seen;
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> at_location;

    for (const auto& r : records) {
        if (!seen.insert(r.identity).second) continue;

        auto& slots = at_location[{r.file, r.line}];
        if (r.tool == Tool::Flawfinder) {
            bool infer_here = std::any_of(slots.begin(), slots.end(), [&](std::size_t i) {
                return out[i].tool == Tool::Infer;
            });
            if (infer_here) continue;
        } else {
            // Infer takes the slot of the first Flawfinder record here; any
            // further Flawfinder records at this location are dropped.
            std::optional<std::size_t> takeover;
            std::vector<std::size_t> kept;
            for (auto i : slots) {
                if (out[i].tool == Tool::Flawfinder) {
                    if (!takeover) takeover = i;
                    else removed[i] = true;
                } else {
                    kept.push_back(i);
                }
            }
            if (takeover) {
                out[*takeover] = r;
                kept.push_back(*takeover);
                slots = std::move(kept);
                continue;
            }
        }
        slots.push_back(out.size());
        out.push_back(r);
        removed.push_back(false);
    }

    std::vector<WarningRecord> result;
    result.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!removed[i]) result.push_back(std::move(out[i]));
    return result;
}

namespace detail {

struct QualifierPattern {
    std::regex re;
    // Capture group index for each slot, 0 when the template lacks it.
    int variable = 0;
    int pointer = 0;
    int function = 0;
};

// Identifier inside backticks may be any expression Infer prints (s.f, p->q).
inline constexpr const char* kIdent = R"((?:`([^`]+)`|([A-Za-z_][A-Za-z0-9_]*)))";

inline const QualifierPattern& qualifier_pattern(WarningType t) {
    using std::regex;
    constexpr auto flags = regex::ECMAScript | regex::icase;
    static const std::array<QualifierPattern, 5> patterns = [] {
        std::string ident = kIdent;
        std::array<QualifierPattern, 5> p;
        // The value read from VAR was never initialized
        p[0] = {regex("^\\s*the value read from " + ident + " was never initialized", flags),
                1, 0, 0};
        // pointer PTR [last assigned on line N] could be null and is dereferenced [...] at line M
        p[1] = {regex("^\\s*pointer " + ident +
                          "(?: last assigned on line \\d+)? could be null and is "
                          "dereferenced",
                      flags),
                0, 1, 0};
        // Resource [of type `T`] acquired to VAR by call to FUNC() at line N is not released after line M
        p[2] = {regex("^\\s*(?:resource(?: of type `[^`]*`)?|memory dynamically) "
                      "(?:acquired|allocated) to " +
                          ident + " by call to `?([A-Za-z_][A-Za-z0-9_]*)(?:\\([^`]*\\))?`?",
                      flags),
                1, 0, 3};
        // The value written to [&]VAR [(type T)] is never used
        p[3] = {regex("^\\s*the value written to (?:`&?([^`]+)`|&?([A-Za-z_][A-Za-z0-9_]*))"
                      "(?: \\(type [^)]*\\))? is never used",
                      flags),
                1, 0, 0};
        // Either the template "without a limit specification, FUNC permits buffer
        // overflows" or the adapter's "`FUNC`: <flawfinder warning>" form.
        p[4] = {regex("^\\s*(?:without a limit specification, `?([A-Za-z_][A-Za-z0-9_]*)"
                      "(?:\\(\\))?`? permits buffer overflows|`([A-Za-z_][A-Za-z0-9_]*)`:)",
                      flags),
                0, 0, 1};
        return p;
    }();
    return patterns[static_cast<std::size_t>(t)];
}

// Group g for backticked form, g+1 for bare identifier (see kIdent).
inline std::optional<std::string> ident_group(const std::smatch& m, int g) {
    if (g <= 0) return std::nullopt;
    auto gi = static_cast<std::size_t>(g);
    if (m[gi].matched) return m[gi].str();
    if (gi + 1 < m.size() && m[gi + 1].matched) return m[gi + 1].str();
    return std::nullopt;
}

} // namespace detail

/// Extracts the identifier slots and "line N" numbers from a qualifier using
/// the per-type template. Unrecognized phrasing yields all-empty slots.
inline QualifierSlots parse_qualifier(WarningType wtype, const std::string& qualifier) {
    QualifierSlots slots;
    const auto& pat = detail::qualifier_pattern(wtype);
    std::smatch m;
    if (!std::regex_search(qualifier, m, pat.re)) return slots;

    slots.variable = detail::ident_group(m, pat.variable);
    slots.pointer = detail::ident_group(m, pat.pointer);
    if (wtype == WarningType::BufferOverflow) {
        slots.function = m[1].matched ? m[1].str() : m[2].str();
    } else if (pat.function > 0) {
        slots.function = m[static_cast<std::size_t>(pat.function)].str();
    }

    static const std::regex line_re(R"(\bline (\d+))", std::regex::icase);
    for (auto it = std::sregex_iterator(qualifier.begin(), qualifier.end(), line_re);
         it != std::sregex_iterator(); ++it) {
        try {
            slots.lines.push_back(std::stoi((*it)[1].str()));
        } catch (const std::out_of_range&) {
        }
    }
    return slots;
}

} // namespace warntriage
