#pragma once

#include "warntriage/error.hpp"
#include "warntriage/model.hpp"
#include "warntriage/process.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace warntriage {

inline constexpr char kCheckpointMagic[8] = {'W', 'T', 'C', 'K', 'P', 'T', '0', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    std::string encoder;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_doubles(std::string& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, sizeof bits);
        put_u64(out, bits);
    }
}

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint64_t u(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::vector<double> doubles(std::size_t expected) {
        auto n = u(8);
        if (n != expected)
            throw ArtifactError("checkpoint array has " + std::to_string(n) + " values, expected " +
                                std::to_string(expected));
        need(n * 8);
        std::vector<double> v(n);
        for (auto& d : v) {
            auto bits = u(8);
            std::memcpy(&d, &bits, sizeof d);
            if (!std::isfinite(d)) throw ArtifactError("checkpoint contains a non-finite weight");
        }
        return v;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw ArtifactError("checkpoint is truncated");
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Magic, version, length-prefixed JSON metadata, then every weight array as
/// a count followed by little-endian IEEE doubles in row-major order.
inline std::string serialize_checkpoint(const Checkpoint& c) {
    const auto& p = c.params;
    nlohmann::ordered_json meta = {
        {"encoder", c.encoder},
        {"dim", p.dim},
        {"hidden", p.hidden},
        {"seed", p.seed},
        {"hyperparams",
         {{"learning_rate", p.hp.learning_rate},
          {"epochs", p.hp.epochs},
          {"batch_size", p.hp.batch_size},
          {"oversample", p.hp.oversample},
          {"init_scale", p.hp.init_scale}}},
        {"binary_classes", p.binary.classes},
        {"multiclass_classes", p.multiclass.classes},
    };
    auto m = meta.dump();

    std::string out(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::put_u32(out, kCheckpointVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(m.size()));
    out += m;
    for (const auto* v : {&p.w1, &p.b1, &p.binary.w, &p.binary.b, &p.multiclass.w, &p.multiclass.b})
        detail::put_doubles(out, *v);
    return out;
}

inline Checkpoint deserialize_checkpoint(std::string_view data) {
    detail::ByteReader r(data);
    if (r.bytes(sizeof kCheckpointMagic) != std::string_view(kCheckpointMagic, sizeof kCheckpointMagic))
        throw ArtifactError("not a warntriage checkpoint");
    auto version = r.u(4);
    if (version != kCheckpointVersion)
        throw ArtifactError("unsupported checkpoint version " + std::to_string(version));
    auto meta_len = r.u(4);

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(r.bytes(meta_len));
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad checkpoint metadata: ") + e.what());
    }

    Checkpoint c;
    auto& p = c.params;
    try {
        c.encoder = meta.at("encoder").get<std::string>();
        p.dim = meta.at("dim").get<std::size_t>();
        p.hidden = meta.at("hidden").get<std::size_t>();
        p.seed = meta.at("seed").get<std::uint64_t>();
        const auto& hp = meta.at("hyperparams");
        p.hp.hidden = p.hidden;
        p.hp.learning_rate = hp.at("learning_rate").get<double>();
        p.hp.epochs = hp.at("epochs").get<int>();
        p.hp.batch_size = hp.at("batch_size").get<int>();
        p.hp.oversample = hp.at("oversample").get<int>();
        p.hp.init_scale = hp.at("init_scale").get<double>();
        p.binary.classes = meta.at("binary_classes").get<std::size_t>();
        p.multiclass.classes = meta.at("multiclass_classes").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError(std::string("bad checkpoint metadata: ") + e.what());
    }

    p.w1 = r.doubles(p.dim * p.hidden);
    p.b1 = r.doubles(p.hidden);
    p.binary.w = r.doubles(p.hidden * p.binary.classes);
    p.binary.b = r.doubles(p.binary.classes);
    p.multiclass.w = r.doubles(p.hidden * p.multiclass.classes);
    p.multiclass.b = r.doubles(p.multiclass.classes);
    if (!r.done()) throw ArtifactError("trailing bytes after checkpoint");
    return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_file_atomic(path, serialize_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto data = read_file(path);
    if (!data) throw ArtifactError("cannot read checkpoint " + path.string());
    return deserialize_checkpoint(*data);
}

} // namespace warntriage
