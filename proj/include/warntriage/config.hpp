#pragma once

#include "warntriage/error.hpp"
#include "warntriage/process.hpp"
#include "warntriage/warning.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace warntriage {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Every accepted key with its default. Anything else is rejected.
inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"seed", "42", "seed for training, splitting and sampling"},
        {"out", "out", "output directory for all artifacts"},
        {"repo", "", "git repository to mine (live backend, or graph/diff source)"},
        {"branches", "HEAD", "comma-separated branch tips to mine"},
        {"graph_file", "", "JSONL commit graph used instead of a git repository"},
        {"backend", "replay", "replay | live"},
        {"replay_dir", "", "directory of <commit>.jsonl warning snapshots"},
        {"diff_dir", "", "directory of <commit>.diff fix patches (when no repo)"},
        {"source_dir", "", "directory of <commit>/<path> source files (when no repo)"},
        {"worktree", "", "scratch worktree for the live backend"},
        {"build_command", "true", "live backend build command"},
        {"tools", "infer,flawfinder", "analyzers run by the live backend"},
        {"infer_command", "infer run -- make", "live backend Infer command"},
        {"infer_report", "infer-out/report.json", "Infer report path inside the worktree"},
        {"flawfinder_command", "flawfinder --csv . > flawfinder.csv", "live backend Flawfinder command"},
        {"flawfinder_report", "flawfinder.csv", "Flawfinder report path inside the worktree"},
        {"timeout_seconds", "1800", "per-step timeout of the live backend"},
        {"threshold_days", "730", "age beyond which a surviving warning is a false warning"},
        {"jobs", "1", "parallel histories during replay mining"},
        {"encoder_dim", "4096", "hashing encoder width"},
        {"hidden", "128", "shared layer width"},
        {"learning_rate", "0.05", "gradient descent step size"},
        {"epochs", "10", "epochs per training stage"},
        {"batch_size", "32", "mini-batch size"},
        {"oversample", "10", "repetitions of each actionable warning during fine-tuning"},
        {"init_scale", "0.5", "shared layer initialization half-width"},
        {"test_fraction", "0.2", "share of the dataset held out for rank/eval"},
        {"eval_samples", "100", "number of evaluation samples"},
        {"eval_sample_size", "1000", "warnings per evaluation sample"},
        {"eval_min_awhb", "5", "minimum AWHBs per evaluation sample"},
        {"gains", "binary", "binary | graded relevance for nDCG"},
        {"synth_false", "40000", "synthetic corpus: false warnings"},
        {"synth_vtb", "151", "synthetic corpus: VTB warnings"},
        {"synth_ltb", "139", "synthetic corpus: LTB warnings"},
        {"synth_utb", "1610", "synthetic corpus: UTB warnings"},
        {"synth_signal_rate", "1.0", "synthetic corpus: share of actionable warnings carrying a class token"},
    };
    return keys;
}

class Config {
public:
    Config() {
        for (const auto& k : config_keys()) values_[k.name] = k.default_value;
    }

    /// `key = value` lines; `#` starts a comment; blank lines are ignored.
    static Config parse(std::string_view text, const std::string& where = "config") {
        Config c;
        std::size_t pos = 0;
        int lineno = 0;
        while (pos < text.size()) {
            auto nl = text.find('\n', pos);
            std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(where + ":" + std::to_string(lineno) + ": expected key = value");
            c.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)),
                  where + ":" + std::to_string(lineno));
        }
        return c;
    }

    static Config load(const std::filesystem::path& path) {
        auto text = read_file(path);
        if (!text) throw ConfigError("cannot read config file " + path.string());
        auto c = parse(*text, path.string());
        c.base_ = path.parent_path();
        return c;
    }

    /// WARNTRIAGE_<KEY> environment variables override file values.
    void apply_environment() {
        for (const auto& k : config_keys()) {
            std::string var = "WARNTRIAGE_";
            for (char ch : k.name) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            if (const char* v = std::getenv(var.c_str())) set(k.name, v, var);
        }
    }

    void set(const std::string& key, const std::string& value, const std::string& where = "override") {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(where + ": unknown config key '" + key + "'");
        it->second = value;
    }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
        return it->second;
    }

    long long integer(const std::string& key, long long min = 0) const {
        const auto& s = str(key);
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ConfigError("config key '" + key + "' is not an integer: '" + s + "'");
        if (v < min) throw ConfigError("config key '" + key + "' must be >= " + std::to_string(min));
        return v;
    }

    std::uint64_t seed() const {
        const auto& s = str("seed");
        std::size_t used = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || s.front() == '-')
            throw ConfigError("config key 'seed' is not a non-negative integer: '" + s + "'");
        return v;
    }

    double real(const std::string& key) const {
        const auto& s = str(key);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw ConfigError("config key '" + key + "' is not a number: '" + s + "'");
        return v;
    }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        const auto& s = str(key);
        std::size_t pos = 0;
        while (pos <= s.size()) {
            auto comma = s.find(',', pos);
            auto item = detail::trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (!item.empty()) out.push_back(item);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    }

    /// Empty for unset keys; relative paths resolve against the config file's directory.
    std::filesystem::path path(const std::string& key) const {
        const auto& s = str(key);
        if (s.empty()) return {};
        std::filesystem::path p(s);
        return p.is_relative() && !base_.empty() ? base_ / p : p;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_;
};

} // namespace warntriage
