#pragma once

#include "warntriage/csyntax.hpp"
#include "warntriage/process.hpp"
#include "warntriage/warning.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warntriage {

struct TextInput {
    std::string bug_type;
    std::string qualifier;
    std::string procedure;
    std::string filename;

    std::array<const std::string*, 4> fields() const { return {&bug_type, &qualifier, &procedure, &filename}; }
    friend bool operator==(const TextInput&, const TextInput&) = default;
};

struct CodeInput {
    std::string statement;
    std::string parent;
    std::vector<std::string> control_flow; // outermost first

    bool empty() const { return statement.empty() && parent.empty() && control_flow.empty(); }
    friend bool operator==(const CodeInput&, const CodeInput&) = default;
};

struct FeatureBundle {
    TextInput text;
    CodeInput code;

    friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

/// Innermost headers kept in the control-flow context.
inline constexpr std::size_t kMaxControlFlowHeaders = 8;

inline TextInput text_features(const WarningRecord& w) {
    return {std::string(display_label(w.wtype)), w.qualifier, w.procedure, w.file};
}

/// Statement, enclosing construct header and guarding-header chain for the
/// warning line. Without usable source the statement falls back to the
/// record's context_code with no parent or flow.
inline CodeInput code_features(const WarningRecord& w, std::optional<std::string_view> source) {
    CodeInput fallback{w.context_code, "", {}};
    if (!source) return fallback;
    auto line = nth_line(*source, w.line);
    if (!line) return fallback;

    auto parsed = csyntax::parse(*source);
    if (!parsed.ok) return fallback;

    CodeInput out;
    out.statement = detail::trim(*line);
    auto chain = csyntax::enclosing(parsed, w.line);
    if (chain.empty()) return out;
    out.parent = chain.back()->header;
    auto first = chain.size() > kMaxControlFlowHeaders ? chain.size() - kMaxControlFlowHeaders : 0;
    for (auto i = first; i < chain.size(); ++i) out.control_flow.push_back(chain[i]->header);
    return out;
}

inline FeatureBundle extract_features(const WarningRecord& w, std::optional<std::string_view> source) {
    return {text_features(w), code_features(w, source)};
}

} // namespace warntriage
