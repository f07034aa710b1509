#pragma once

#include "warntriage/csyntax.hpp"
#include "warntriage/diff.hpp"
#include "warntriage/error.hpp"
#include "warntriage/warning.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace warntriage {

struct KeywordTables {
    std::map<WarningType, std::vector<std::string>> wtk;
    std::vector<std::string> ck;

    /// Keyword lists of the semantic matching rule.
    static const KeywordTables& standard() {
        static const KeywordTables t{
            {
                {WarningType::UninitializedVariable, {"initial", "define", "assign", "declare"}},
                {WarningType::NullDereference, {"dereference", "null pointer", "null check", "NullPointerException"}},
                {WarningType::ResourceLeak,
                 {"resource", "leak", "release", "cleanup", "alloc", "clear", "close", "free", "destroy",
                  "terminate", "end"}},
                {WarningType::DeadStore, {"dead store", "unused", "redundant"}},
                {WarningType::BufferOverflow, {"buffer", "overflow"}},
            },
            {"fix", "repair", "bug", "warning", "solve", "problem", "handle", "eliminate", "address", "issue",
             "fail", "error", "exception", "patch", "crash"},
        };
        return t;
    }
};

enum class AggregateLabel { UTB, LTB, VTB };

inline std::string_view to_string(AggregateLabel a) {
    switch (a) {
    case AggregateLabel::VTB: return "VTB";
    case AggregateLabel::LTB: return "LTB";
    case AggregateLabel::UTB: return "UTB";
    }
    return "";
}

struct WeakLabel {
    int cm = 0;
    int cc = 0;
    AggregateLabel aggregate = AggregateLabel::UTB;
    bool awhb = false;

    friend bool operator==(const WeakLabel&, const WeakLabel&) = default;
};

namespace detail {

inline bool contains_ci(std::string_view haystack_lower, std::string_view needle) {
    return haystack_lower.find(to_lower(needle)) != std::string_view::npos;
}

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Case-sensitive occurrence of `word` not flanked by identifier characters.
inline bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        bool left = pos == 0 || !is_word_char(text[pos - 1]);
        auto end = pos + word.size();
        bool right = end >= text.size() || !is_word_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

inline std::string regex_escape(std::string_view s) {
    static const std::string special = R"(\^$.|?*+()[]{}/-)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) out += '\\';
        out += c;
    }
    return out;
}

/// Word-boundary pattern for an identifier that may contain '.', '->' etc.
inline std::string word_pattern(std::string_view ident) {
    return "(?:^|[^A-Za-z0-9_])" + regex_escape(ident) + "(?![A-Za-z0-9_])";
}

} // namespace detail

/// Commit-message score: 3 for a type keyword, 2 for a qualifier identifier,
/// 1 for a common fix keyword, else 0. Keywords match case-insensitively as
/// substrings; identifiers match case-sensitively as whole words.
inline int semantic_score(WarningType wtype, const QualifierSlots& slots, std::string_view message,
                          const KeywordTables& tables = KeywordTables::standard()) {
    auto lower = detail::to_lower(message);
    if (auto it = tables.wtk.find(wtype); it != tables.wtk.end())
        for (const auto& k : it->second)
            if (detail::contains_ci(lower, k)) return 3;
    for (const auto* ident : {&slots.variable, &slots.pointer, &slots.function})
        if (*ident && detail::contains_word(message, **ident)) return 2;
    for (const auto& k : tables.ck)
        if (detail::contains_ci(lower, k)) return 1;
    return 0;
}

/// Proximity bound for scope matching when the procedure cannot be located.
inline constexpr int kScopeWindowLines = 50;

enum class ScopeDirection { BeforeWarning, AfterWarning };

inline ScopeDirection scope_direction(WarningType t) {
    switch (t) {
    case WarningType::ResourceLeak:
    case WarningType::DeadStore: return ScopeDirection::AfterWarning;
    default: return ScopeDirection::BeforeWarning;
    }
}

/// Where a fixing change may land: the warned procedure's span in the
/// post-image when known, else +-kScopeWindowLines around the warning.
struct ScopeWindow {
    std::optional<csyntax::LineSpan> procedure_span;

    bool admits(WarningType t, int warning_line, int changed_line) const {
        bool direction = scope_direction(t) == ScopeDirection::BeforeWarning ? changed_line <= warning_line
                                                                             : changed_line >= warning_line;
        if (!direction) return false;
        if (procedure_span) return procedure_span->contains(changed_line);
        int d = changed_line - warning_line;
        return d <= kScopeWindowLines && d >= -kScopeWindowLines;
    }
};

/// Builds the scope window from post-image source of the warned file.
inline ScopeWindow scope_window_for(const WarningRecord& w, std::optional<std::string_view> post_image) {
    ScopeWindow win;
    if (post_image && !w.procedure.empty()) win.procedure_span = csyntax::locate_function(*post_image, w.procedure);
    return win;
}

namespace detail {

inline bool same_file(const DiffHunk& h, const WarningRecord& w) {
    if (h.file == w.file) return true;
    // tolerate "./x.c" vs "x.c"
    auto norm = [](std::string_view p) {
        while (p.rfind("./", 0) == 0) p.remove_prefix(2);
        return p;
    };
    return norm(h.file) == norm(w.file);
}

struct ChangedLine {
    int line;
    const std::string* text;
    bool added;
};

inline std::vector<ChangedLine> scoped_changes(WarningType t, const WarningRecord& w,
                                               const std::vector<DiffHunk>& hunks, const ScopeWindow& win) {
    std::vector<ChangedLine> out;
    for (const auto& h : hunks) {
        if (!same_file(h, w)) continue;
        for (const auto& [ln, text] : h.added)
            if (win.admits(t, w.line, ln)) out.push_back({ln, &text, true});
        for (const auto& [ln, text] : h.removed)
            if (win.admits(t, w.line, ln)) out.push_back({ln, &text, false});
    }
    return out;
}

struct Call {
    std::string callee;
    std::string args;
};

/// Calls `name(args)` on a single line; args are the balanced-paren contents.
inline std::vector<Call> find_calls(std::string_view line) {
    std::vector<Call> calls;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] != '(' || i == 0) continue;
        auto e = i;
        while (e > 0 && line[e - 1] == ' ') --e;
        auto b = e;
        while (b > 0 && is_word_char(line[b - 1])) --b;
        if (b == e || std::isdigit(static_cast<unsigned char>(line[b]))) continue;
        int depth = 0;
        auto j = i;
        for (; j < line.size(); ++j) {
            if (line[j] == '(') ++depth;
            else if (line[j] == ')' && --depth == 0) break;
        }
        auto args = line.substr(i + 1, (j < line.size() ? j : line.size()) - i - 1);
        calls.push_back({std::string(line.substr(b, e - b)), std::string(args)});
    }
    return calls;
}

inline bool is_control_keyword(std::string_view s) {
    return s == "if" || s == "while" || s == "for" || s == "switch" || s == "return" || s == "sizeof";
}

inline bool assigns(std::string_view line, std::string_view var) {
    std::regex re(word_pattern(var) + R"(\s*(?:\[[^\]]*\]\s*)?=(?!=))");
    return std::regex_search(line.begin(), line.end(), re);
}

inline bool passes_address(std::string_view line, std::string_view var) {
    for (const auto& c : find_calls(line))
        if (!is_control_keyword(c.callee) && std::regex_search(c.args, std::regex("&\\s*" + regex_escape(var) + "(?![A-Za-z0-9_])")))
            return true;
    return false;
}

inline bool is_conditional(std::string_view line) {
    static const std::regex re(R"((?:^|[^A-Za-z0-9_])(?:if|while)\s*\(|\?|(?:^|[^A-Za-z0-9_])assert\s*\()");
    return std::regex_search(line.begin(), line.end(), re);
}

inline bool null_test(std::string_view line, std::string_view ptr) {
    auto p = regex_escape(ptr);
    auto nb = "(?![A-Za-z0-9_])";
    std::string null_lit = "(?:NULL|nullptr|0|\\(void\\s*\\*\\)\\s*0)";
    std::regex re("!\\s*\\(?\\s*" + p + nb +
                  "|(?:^|[^A-Za-z0-9_.>])" + p + "\\s*[!=]=\\s*" + null_lit + nb +
                  "|" + null_lit + "\\s*[!=]=\\s*" + p + nb +
                  "|(?:if|while)\\s*\\(\\s*" + p + "\\s*(?:\\)|&&|\\|\\|)" +
                  "|(?:&&|\\|\\|)\\s*" + p + "\\s*(?:\\)|&&|\\|\\|)");
    return std::regex_search(line.begin(), line.end(), re);
}

inline bool frees(std::string_view line, std::string_view var) {
    static const char* kFreeWords[] = {"free", "close", "release", "destroy", "cleanup", "clear", "terminate", "end"};
    for (const auto& c : find_calls(line)) {
        if (is_control_keyword(c.callee)) continue;
        auto callee = to_lower(c.callee);
        bool free_like = false;
        for (auto w : kFreeWords)
            if (callee.find(w) != std::string::npos) free_like = true;
        if (free_like && contains_word(c.args, var)) return true;
    }
    return false;
}

inline const std::map<std::string, std::vector<std::string>>& bounded_counterparts() {
    static const std::map<std::string, std::vector<std::string>> m = {
        {"strcpy", {"strncpy", "strlcpy"}},
        {"sprintf", {"snprintf"}},
        {"strcat", {"strncat", "strlcat"}},
        {"gets", {"fgets"}},
    };
    return m;
}

inline bool calls(std::string_view line, std::string_view fn) {
    for (const auto& c : find_calls(line))
        if (c.callee == fn) return true;
    return false;
}

inline bool bounds_check(std::string_view line) {
    if (!is_conditional(line)) return false;
    std::string s(line);
    for (std::size_t p; (p = s.find("->")) != std::string::npos;) s.replace(p, 2, ".");
    static const std::regex re(R"((strlen|sizeof|[A-Za-z_]*(?:len|size|max|cap)[A-Za-z0-9_]*)[^;]*(?:<|>)|(?:<|>)[^;]*(strlen|sizeof|[A-Za-z_]*(?:len|size|max|cap)[A-Za-z0-9_]*))",
                               std::regex::icase);
    return std::regex_search(s, re);
}

} // namespace detail

/// True when some changed line in the warned file falls in the type's scope:
/// at or before the warning for Uninitialized/Null/Buffer, at or after it for
/// ResourceLeak/DeadStore, inside the window.
inline bool in_scope(WarningType wtype, const WarningRecord& warning, const std::vector<DiffHunk>& hunks,
                     const ScopeWindow& window = {}) {
    return !detail::scoped_changes(wtype, warning, hunks, window).empty();
}

/// Per-type fix-pattern detector over the in-scope changed lines.
inline bool detect_fix_pattern(WarningType wtype, const QualifierSlots& slots, const WarningRecord& warning,
                               const std::vector<DiffHunk>& hunks, const ScopeWindow& window = {}) {
    auto changes = detail::scoped_changes(wtype, warning, hunks, window);
    switch (wtype) {
    case WarningType::UninitializedVariable: {
        if (!slots.variable) return false;
        const auto& v = *slots.variable;
        for (const auto& c : changes)
            if (c.added && (detail::assigns(*c.text, v) || detail::passes_address(*c.text, v))) return true;
        return false;
    }
    case WarningType::NullDereference: {
        if (!slots.pointer) return false;
        for (const auto& c : changes)
            if (c.added && detail::is_conditional(*c.text) && detail::null_test(*c.text, *slots.pointer))
                return true;
        return false;
    }
    case WarningType::ResourceLeak: {
        if (!slots.variable) return false;
        for (const auto& c : changes)
            if (c.added && detail::frees(*c.text, *slots.variable)) return true;
        return false;
    }
    case WarningType::DeadStore: {
        if (!slots.variable) return false;
        const auto& v = *slots.variable;
        for (const auto& c : changes) {
            if (c.added && c.line > warning.line && detail::contains_word(*c.text, v) && !detail::assigns(*c.text, v))
                return true;
            if (!c.added && detail::assigns(*c.text, v) &&
                (c.line == warning.line || detail::trim(*c.text) == warning.context_code))
                return true;
        }
        return false;
    }
    case WarningType::BufferOverflow: {
        for (const auto& c : changes)
            if (c.added && detail::bounds_check(*c.text)) return true;
        if (!slots.function) return false;
        auto it = detail::bounded_counterparts().find(*slots.function);
        if (it == detail::bounded_counterparts().end()) return false;
        for (const auto& h : hunks) {
            if (!detail::same_file(h, warning)) continue;
            bool removed_unsafe = false, added_safe = false;
            for (const auto& [ln, text] : h.removed)
                if (window.admits(wtype, warning.line, ln) && detail::calls(text, *slots.function)) removed_unsafe = true;
            for (const auto& [ln, text] : h.added)
                for (const auto& safe : it->second)
                    if (window.admits(wtype, warning.line, ln) && detail::calls(text, safe)) added_safe = true;
            if (removed_unsafe && added_safe) return true;
        }
        return false;
    }
    }
    return false;
}

/// 2 for a fix pattern, 1 for an in-scope change, else 0.
inline int structural_score(WarningType wtype, const QualifierSlots& slots, const WarningRecord& warning,
                            const std::vector<DiffHunk>& hunks, const ScopeWindow& window = {}) {
    if (detect_fix_pattern(wtype, slots, warning, hunks, window)) return 2;
    if (in_scope(wtype, warning, hunks, window)) return 1;
    return 0;
}

/// VTB when cm+cc > 3, LTB when 2 <= cm+cc <= 3, else UTB; AWHB = VTB or LTB.
inline WeakLabel aggregate(int cm, int cc) {
    if (cm < 0 || cm > 3) throw std::invalid_argument("semantic score out of range: " + std::to_string(cm));
    if (cc < 0 || cc > 2) throw std::invalid_argument("structural score out of range: " + std::to_string(cc));
    WeakLabel l;
    l.cm = cm;
    l.cc = cc;
    int s = cm + cc;
    l.aggregate = s > 3 ? AggregateLabel::VTB : s >= 2 ? AggregateLabel::LTB : AggregateLabel::UTB;
    l.awhb = l.aggregate != AggregateLabel::UTB;
    return l;
}

/// Scores one actionable warning against its fix commit.
inline WeakLabel label_warning(const WarningRecord& warning, std::string_view fix_message,
                               const std::vector<DiffHunk>& hunks,
                               std::optional<std::string_view> post_image = std::nullopt) {
    auto slots = parse_qualifier(warning.wtype, warning.qualifier);
    auto window = scope_window_for(warning, post_image);
    return aggregate(semantic_score(warning.wtype, slots, fix_message),
                     structural_score(warning.wtype, slots, warning, hunks, window));
}

} // namespace warntriage
