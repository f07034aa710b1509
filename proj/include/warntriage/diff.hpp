#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace warntriage {

struct DiffHunk {
    std::string file; // post-image path; pre-image path for deletions
    std::vector<std::pair<int, std::string>> added;   // (new line, text)
    std::vector<std::pair<int, std::string>> removed; // (old line, text)
};

namespace detail {

inline std::string strip_diff_prefix(std::string_view path) {
    // "a/foo.c", "b/foo.c", optionally followed by a tab and timestamp
    auto tab = path.find('\t');
    if (tab != std::string_view::npos) path = path.substr(0, tab);
    while (!path.empty() && (path.back() == '\r' || path.back() == ' ')) path.remove_suffix(1);
    if (path.size() > 2 && (path.substr(0, 2) == "a/" || path.substr(0, 2) == "b/"))
        path.remove_prefix(2);
    return std::string(path);
}

inline bool parse_range(std::string_view s, int& start, int& count) {
    // "-12,3" -> (12, 3); "+12" -> (12, 1)
    if (s.size() < 2) return false;
    s.remove_prefix(1);
    auto to_int = [](std::string_view n, int& out) {
        if (n.empty()) return false;
        int v = 0;
        for (char c : n) {
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
        out = v;
        return true;
    };
    auto comma = s.find(',');
    if (comma == std::string_view::npos) {
        count = 1;
        return to_int(s, start);
    }
    return to_int(s.substr(0, comma), start) && to_int(s.substr(comma + 1), count);
}

} // namespace detail

/// Parses `git diff` unified output into one DiffHunk per "@@" section.
/// Lines that are not part of a recognised structure are ignored.
inline std::vector<DiffHunk> parse_unified_diff(std::string_view text) {
    std::vector<DiffHunk> hunks;
    std::string old_path, new_path;
    bool in_hunk = false;
    int old_line = 0, new_line = 0, old_left = 0, new_left = 0;

    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (in_hunk) {
            auto& cur = hunks.back();
            if (!line.empty() && line[0] == '\\') continue; // "\ No newline at end of file"
            char tag = line.empty() ? ' ' : line[0];
            if (tag == '+' && new_left > 0) {
                cur.added.emplace_back(new_line++, std::string(line.substr(1)));
                --new_left;
            } else if (tag == '-' && old_left > 0) {
                cur.removed.emplace_back(old_line++, std::string(line.substr(1)));
                --old_left;
            } else if (tag == ' ' && old_left > 0 && new_left > 0) {
                ++old_line;
                ++new_line;
                --old_left;
                --new_left;
            } else {
                in_hunk = false;
            }
            if (old_left == 0 && new_left == 0) in_hunk = false;
            if (in_hunk || tag == '+' || tag == '-' || tag == ' ') continue;
        }

        if (line.rfind("diff --git ", 0) == 0) {
            old_path.clear();
            new_path.clear();
        } else if (line.rfind("--- ", 0) == 0) {
            old_path = detail::strip_diff_prefix(line.substr(4));
        } else if (line.rfind("+++ ", 0) == 0) {
            new_path = detail::strip_diff_prefix(line.substr(4));
        } else if (line.rfind("@@ ", 0) == 0) {
            auto rest = line.substr(3);
            auto sp = rest.find(' ');
            if (sp == std::string_view::npos) continue;
            auto rest2 = rest.substr(sp + 1);
            if (!detail::parse_range(rest.substr(0, sp), old_line, old_left)) continue;
            if (!detail::parse_range(rest2.substr(0, rest2.find(' ')), new_line, new_left)) continue;
            // zero-length ranges name the line before the (empty) range
            if (old_left == 0) ++old_line;
            if (new_left == 0) ++new_line;
            DiffHunk h;
            h.file = (new_path.empty() || new_path == "/dev/null") ? old_path : new_path;
            hunks.push_back(std::move(h));
            in_hunk = old_left > 0 || new_left > 0;
        }
    }
    return hunks;
}

} // namespace warntriage
