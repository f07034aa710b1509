#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace warntriage::csyntax {

// Lightweight, error-tolerant C structure scanner. It only recovers brace
// nesting and the headers that own each brace (functions, conditionals,
// loops); the preprocessor is not run and declarations are not typed.

enum class ConstructKind { Function, If, Else, For, While, Do, Switch, Block, Aggregate };

struct Token {
    enum Kind { Ident, Number, Punct, Literal } kind = Punct;
    std::string text;
    int line = 1;
    std::size_t offset = 0;
    std::size_t length = 0;
};

struct Construct {
    ConstructKind kind = ConstructKind::Block;
    std::string header;  // whitespace-collapsed header text
    std::string name;    // function name, if kind == Function
    int header_line = 0;
    int end_line = 0;
    std::size_t body_begin = 0; // token range of the body, inclusive
    std::size_t body_end = 0;
};

struct LineSpan {
    int first = 0;
    int last = 0;
    bool contains(int line) const { return first <= line && line <= last; }
};

struct ParseResult {
    std::string cleaned; // source with comments/preprocessor blanked, newlines kept
    std::vector<Token> tokens;
    std::vector<Construct> constructs;
    bool ok = true;
};

namespace detail {

inline std::string collapse_ws(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = !out.empty();
        } else {
            if (space) out += ' ';
            space = false;
            out += c;
        }
    }
    return out;
}

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// Blanks comments and preprocessor directives; string and char literals are kept.
inline std::string clean_source(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    bool line_start = true;
    auto blank = [&](std::size_t from, std::size_t to) {
        for (auto k = from; k < to && k < out.size(); ++k)
            if (out[k] != '\n') out[k] = ' ';
    };
    while (i < out.size()) {
        char c = out[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (line_start && c == '#') {
            auto j = i;
            while (j < out.size()) {
                if (out[j] == '\n' && (j == 0 || out[j - 1] != '\\')) break;
                ++j;
            }
            blank(i, j);
            i = j;
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c))) line_start = false;
        if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
            auto j = out.find('\n', i);
            if (j == std::string::npos) j = out.size();
            blank(i, j);
            i = j;
        } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '*') {
            auto j = out.find("*/", i + 2);
            j = j == std::string::npos ? out.size() : j + 2;
            blank(i, j);
            i = j;
        } else if (c == '"' || c == '\'') {
            auto j = i + 1;
            while (j < out.size() && out[j] != c && out[j] != '\n') j += out[j] == '\\' ? 2 : 1;
            i = std::min(out.size(), j + 1);
        } else {
            ++i;
        }
    }
    return out;
}

inline std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> toks;
    int line = 1;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.offset = i;
        if (ident_start(c)) {
            auto j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            t.kind = Token::Ident;
            t.text = s.substr(i, j - i);
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            auto j = i;
            while (j < s.size() && (ident_char(s[j]) || s[j] == '.')) ++j;
            t.kind = Token::Number;
            t.text = s.substr(i, j - i);
            i = j;
        } else if (c == '"' || c == '\'') {
            auto j = i + 1;
            while (j < s.size() && s[j] != c && s[j] != '\n') j += s[j] == '\\' ? 2 : 1;
            j = std::min(s.size(), j + 1);
            t.kind = Token::Literal;
            t.text = s.substr(i, j - i);
            for (auto k = i; k < j; ++k)
                if (s[k] == '\n') ++line;
            i = j;
        } else {
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            ++i;
        }
        t.length = i - t.offset;
        toks.push_back(std::move(t));
    }
    return toks;
}

class Parser {
public:
    explicit Parser(ParseResult& r) : r_(r), toks_(r.tokens) {}

    void run() {
        items(false);
    }

private:
    static constexpr int kMaxDepth = 200;

    bool at(std::string_view s) const { return i_ < toks_.size() && toks_[i_].text == s; }

    std::string header_text(std::size_t from, std::size_t to) const {
        if (from >= to || to > toks_.size()) return {};
        auto b = toks_[from].offset;
        auto e = toks_[to - 1].offset + toks_[to - 1].length;
        return collapse_ws(std::string_view(r_.cleaned).substr(b, e - b));
    }

    void skip_parens() {
        if (!at("(")) return;
        int depth = 0;
        while (i_ < toks_.size()) {
            if (at("(")) ++depth;
            else if (at(")")) {
                if (--depth == 0) {
                    ++i_;
                    return;
                }
            }
            ++i_;
        }
    }

    void skip_braces() {
        int depth = 0;
        while (i_ < toks_.size()) {
            if (at("{")) ++depth;
            else if (at("}")) {
                if (--depth == 0) {
                    ++i_;
                    return;
                }
            }
            ++i_;
        }
    }

    void items(bool until_brace) {
        while (i_ < toks_.size() && r_.ok) {
            if (at("}")) {
                if (until_brace) return;
                ++i_; // stray closer at file scope
                continue;
            }
            statement();
        }
    }

    int line_of(std::size_t idx) const {
        if (toks_.empty()) return 0;
        return toks_[std::min(idx, toks_.size() - 1)].line;
    }

    void finish(std::size_t slot, std::size_t body_begin) {
        auto& c = r_.constructs[slot];
        c.body_begin = body_begin;
        c.body_end = i_ == 0 ? 0 : i_ - 1;
        c.end_line = line_of(c.body_end);
    }

    std::size_t open(ConstructKind kind, std::size_t header_from, std::size_t header_to) {
        Construct c;
        c.kind = kind;
        c.header = header_text(header_from, header_to);
        c.header_line = line_of(header_from);
        r_.constructs.push_back(std::move(c));
        return r_.constructs.size() - 1;
    }

    void braced_body(std::size_t slot) {
        auto begin = i_;
        ++i_; // '{'
        items(true);
        if (at("}")) ++i_;
        finish(slot, begin);
    }

    void statement() {
        if (++depth_ > kMaxDepth) {
            r_.ok = false;
            --depth_;
            return;
        }
        struct Leave {
            int& d;
            ~Leave() { --d; }
        } leave{depth_};

        const auto& t = toks_[i_];
        if (t.text == "{") {
            braced_body(open(ConstructKind::Block, i_, i_));
            return;
        }
        if (t.text == ";") {
            ++i_;
            return;
        }
        if (t.kind == Token::Ident && (t.text == "if" || t.text == "while" || t.text == "for" || t.text == "switch")) {
            auto kind = t.text == "if" ? ConstructKind::If
                        : t.text == "while" ? ConstructKind::While
                        : t.text == "for" ? ConstructKind::For
                                          : ConstructKind::Switch;
            auto from = i_++;
            skip_parens();
            auto slot = open(kind, from, i_);
            auto begin = i_;
            if (i_ < toks_.size()) statement();
            finish(slot, begin);
            if (kind == ConstructKind::If && at("else")) {
                auto eslot = open(ConstructKind::Else, i_, i_ + 1);
                ++i_;
                auto ebegin = i_;
                if (i_ < toks_.size()) statement();
                finish(eslot, ebegin);
            }
            return;
        }
        if (t.kind == Token::Ident && t.text == "do") {
            auto slot = open(ConstructKind::Do, i_, i_ + 1);
            ++i_;
            auto begin = i_;
            if (i_ < toks_.size()) statement();
            finish(slot, begin);
            if (at("while")) {
                ++i_;
                skip_parens();
                if (at(";")) ++i_;
            }
            return;
        }
        if (t.kind == Token::Ident && (t.text == "case" || t.text == "default")) {
            while (i_ < toks_.size() && !at(":") && !at("{") && !at("}")) ++i_;
            if (at(":")) ++i_;
            return;
        }
        if (t.kind == Token::Ident && t.text == "else") {
            // dangling else without a matching if
            ++i_;
            return;
        }
        generic();
    }

    void generic() {
        auto from = i_;
        int parens = 0;
        bool has_assign = false;
        bool aggregate_kw = false;
        while (i_ < toks_.size()) {
            const auto& t = toks_[i_];
            if (t.text == "(" || t.text == "[") ++parens;
            else if (t.text == ")" || t.text == "]") parens = std::max(0, parens - 1);
            else if (parens == 0 && t.text == ";") {
                ++i_;
                return;
            } else if (parens == 0 && t.text == "}") {
                return; // missing ';' before a closer
            } else if (parens == 0 && t.text == "=") {
                has_assign = true;
            } else if (t.kind == Token::Ident &&
                       (t.text == "struct" || t.text == "union" || t.text == "enum" || t.text == "typedef")) {
                aggregate_kw = true;
            } else if (t.text == "{") {
                if (parens > 0) {
                    skip_braces(); // statement expression / compound literal
                    continue;
                }
                bool fn_like = i_ > from && toks_[i_ - 1].text == ")" && !has_assign && !aggregate_kw;
                if (!fn_like && (has_assign || aggregate_kw)) {
                    skip_braces(); // initializer or type body; the declaration continues
                    continue;
                }
                auto slot = open(fn_like ? ConstructKind::Function : ConstructKind::Block, from, i_);
                if (fn_like) {
                    for (auto k = from; k + 1 < i_; ++k)
                        if (toks_[k + 1].text == "(" && toks_[k].kind == Token::Ident) {
                            r_.constructs[slot].name = toks_[k].text;
                            break;
                        }
                }
                braced_body(slot);
                return;
            }
            ++i_;
        }
    }

    ParseResult& r_;
    const std::vector<Token>& toks_;
    std::size_t i_ = 0;
    int depth_ = 0;
};

} // namespace detail

inline ParseResult parse(std::string_view source) {
    ParseResult r;
    r.cleaned = detail::clean_source(source);
    r.tokens = detail::tokenize(r.cleaned);
    detail::Parser(r).run();
    return r;
}

inline bool is_flow_kind(ConstructKind k) {
    return k != ConstructKind::Block && k != ConstructKind::Aggregate;
}

/// Function/conditional/loop constructs whose body encloses the first token
/// on `line`, outermost first. Empty when the line holds no token.
inline std::vector<const Construct*> enclosing(const ParseResult& r, int line) {
    std::vector<const Construct*> out;
    auto it = std::find_if(r.tokens.begin(), r.tokens.end(), [&](const Token& t) { return t.line == line; });
    if (it == r.tokens.end()) return out;
    auto idx = static_cast<std::size_t>(it - r.tokens.begin());
    for (const auto& c : r.constructs)
        if (is_flow_kind(c.kind) && c.body_begin <= idx && idx <= c.body_end) out.push_back(&c);
    std::stable_sort(out.begin(), out.end(),
                     [](const Construct* a, const Construct* b) { return a->body_begin < b->body_begin; });
    return out;
}

/// Line span (signature through closing brace) of the first function named `name`.
inline std::optional<LineSpan> locate_function(const ParseResult& r, std::string_view name) {
    auto paren = name.find('(');
    if (paren != std::string_view::npos) name = name.substr(0, paren);
    if (name.empty()) return std::nullopt;
    for (const auto& c : r.constructs)
        if (c.kind == ConstructKind::Function && c.name == name) return LineSpan{c.header_line, c.end_line};
    return std::nullopt;
}

inline std::optional<LineSpan> locate_function(std::string_view source, std::string_view name) {
    auto r = parse(source);
    if (!r.ok) return std::nullopt;
    return locate_function(r, name);
}

} // namespace warntriage::csyntax
