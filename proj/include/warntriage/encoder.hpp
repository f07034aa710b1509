#pragma once

#include "warntriage/features.hpp"
#include "warntriage/warning.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace warntriage {

struct SparseVector {
    std::vector<std::uint32_t> index; // strictly increasing
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
};

inline SparseVector sparsify(const std::vector<double>& dense) {
    SparseVector s;
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) {
            s.index.push_back(static_cast<std::uint32_t>(i));
            s.value.push_back(dense[i]);
        }
    return s;
}

/// Maps a feature bundle to a fixed-length real vector.
class Encoder {
public:
    virtual ~Encoder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::string name() const = 0;
    virtual std::vector<double> encode(const FeatureBundle& b) const = 0;
    virtual SparseVector encode_sparse(const FeatureBundle& b) const { return sparsify(encode(b)); }
};

inline constexpr std::size_t kReferenceDim = 4096;
inline constexpr std::string_view kFieldSeparator = "[sep]";

/// Feature-hashing encoder: text tokens fill the first half of the vector,
/// code tokens the second half. Unigram and bigram counts, each half scaled
/// to unit L2 norm when nonzero.
class HashingEncoder : public Encoder {
public:
    explicit HashingEncoder(std::size_t dim = kReferenceDim) : dim_(dim) {
        if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("encoder dimension must be even and >= 2");
    }

    std::size_t dim() const override { return dim_; }
    std::string name() const override { return "hashing-v1"; }

    std::vector<double> encode(const FeatureBundle& b) const override {
        std::vector<double> out(dim_, 0.0);
        auto s = encode_sparse(b);
        for (std::size_t i = 0; i < s.nnz(); ++i) out[s.index[i]] = s.value[i];
        return out;
    }

    SparseVector encode_sparse(const FeatureBundle& b) const override {
        std::vector<std::string> text;
        bool first = true;
        for (const auto* f : b.text.fields()) {
            if (!first) text.emplace_back(kFieldSeparator);
            first = false;
            tokenize(*f, text);
        }
        std::vector<std::string> code;
        tokenize(b.code.statement, code);
        if (!b.code.parent.empty()) {
            code.emplace_back(kFieldSeparator);
            tokenize(b.code.parent, code);
        }
        for (const auto& h : b.code.control_flow) {
            code.emplace_back(kFieldSeparator);
            tokenize(h, code);
        }

        const std::size_t half = dim_ / 2;
        std::map<std::uint32_t, double> acc;
        hash_into(text, 0, half, acc);
        hash_into(code, half, half, acc);

        SparseVector s;
        double norms[2] = {0.0, 0.0};
        for (const auto& [i, v] : acc) norms[i >= half ? 1 : 0] += v * v;
        for (auto& n : norms) n = std::sqrt(n);
        for (const auto& [i, v] : acc) {
            s.index.push_back(i);
            s.value.push_back(v / norms[i >= half ? 1 : 0]);
        }
        return s;
    }

    /// Lowercased identifier/number runs plus single punctuation characters.
    static void tokenize(std::string_view s, std::vector<std::string>& out) {
        std::size_t i = 0;
        while (i < s.size()) {
            unsigned char c = static_cast<unsigned char>(s[i]);
            if (std::isalnum(c) || c == '_') {
                std::string tok;
                while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
                    tok += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i++])));
                out.push_back(std::move(tok));
            } else {
                if (!std::isspace(c)) out.emplace_back(1, static_cast<char>(c));
                ++i;
            }
        }
    }

private:
    static void hash_into(const std::vector<std::string>& toks, std::size_t base, std::size_t width,
                          std::map<std::uint32_t, double>& acc) {
        for (std::size_t i = 0; i < toks.size(); ++i) {
            auto h = detail::fnv1a(toks[i]);
            acc[static_cast<std::uint32_t>(base + h % width)] += 1.0;
            if (i + 1 < toks.size()) {
                auto hb = detail::fnv1a(toks[i + 1], detail::fnv1a("\x1f", h));
                acc[static_cast<std::uint32_t>(base + hb % width)] += 1.0;
            }
        }
    }

    std::size_t dim_;
};

/// The reference encoder at its default width.
inline std::vector<double> encode_reference(const FeatureBundle& b) {
    static const HashingEncoder enc(kReferenceDim);
    return enc.encode(b);
}

} // namespace warntriage
