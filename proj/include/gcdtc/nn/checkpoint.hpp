#ifndef GCDTC_NN_CHECKPOINT_HPP
#define GCDTC_NN_CHECKPOINT_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcdtc/io/raw.hpp"
#include "gcdtc/nn/tensor.hpp"
#include "gcdtc/util/bytes.hpp"
#include "gcdtc/util/crc32.hpp"

namespace gcdtc::nn {

// Checkpoint file: magic "GCKP", version u16, count u32, then per entry
// (name length u16, name bytes, rank u8, dims u32[], f64 payload), trailing
// CRC32 over everything before it. Entries are sorted by name so the byte
// layout is deterministic.

inline constexpr uint16_t kCheckpointVersion = 1;

inline std::vector<uint8_t> serialize_checkpoint(const std::vector<const ParamTensor*>& params) {
    std::vector<const ParamTensor*> sorted = params;
    std::sort(sorted.begin(), sorted.end(),
              [](const ParamTensor* a, const ParamTensor* b) { return a->name < b->name; });
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->name == sorted[i - 1]->name)
            throw std::invalid_argument("duplicate parameter name '" + sorted[i]->name + "'");

    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("GCKP"), 4);
    w.u16(kCheckpointVersion);
    w.u32(static_cast<uint32_t>(sorted.size()));
    for (const ParamTensor* p : sorted) {
        w.str(p->name);
        w.u8(static_cast<uint8_t>(p->value.rank()));
        for (int d : p->value.shape()) w.u32(static_cast<uint32_t>(d));
        for (size_t i = 0; i < p->value.size(); ++i) w.f64(p->value[i]);
    }
    w.u32(crc32(w.data()));
    return w.take();
}

inline size_t save_checkpoint(const std::vector<const ParamTensor*>& params,
                              const std::string& path) {
    auto bytes = serialize_checkpoint(params);
    io::write_file_bytes(path, bytes);
    return bytes.size();
}

// Parses a checkpoint into (name -> tensor). Throws on version mismatch or a
// CRC failure (any tampered byte).
inline std::map<std::string, Tensor> parse_checkpoint(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 14) throw std::runtime_error("checkpoint too short");
    uint32_t stored;
    {
        ByteReader tail(bytes.data() + bytes.size() - 4, 4);
        stored = tail.u32();
    }
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw std::runtime_error("checkpoint CRC mismatch (corrupt blob)");

    ByteReader r(bytes.data(), bytes.size() - 4);
    char magic[4];
    r.raw(reinterpret_cast<uint8_t*>(magic), 4);
    if (std::string(magic, 4) != "GCKP") throw std::runtime_error("bad checkpoint magic");
    uint16_t version = r.u16();
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint version mismatch: " + std::to_string(version));
    uint32_t count = r.u32();

    std::map<std::string, Tensor> out;
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        uint8_t rank = r.u8();
        if (rank < 1 || rank > 5) throw std::runtime_error("bad tensor rank in checkpoint");
        std::vector<int> shape(rank);
        for (auto& d : shape) d = static_cast<int>(r.u32());
        Tensor t(shape);
        for (size_t k = 0; k < t.size(); ++k) t[k] = r.f64();
        if (!out.emplace(std::move(name), std::move(t)).second)
            throw std::runtime_error("duplicate name in checkpoint");
    }
    return out;
}

// Loads into an existing parameter list; every name must be present with a
// matching shape, and the file may not carry extras.
inline void load_checkpoint(const std::string& path, const std::vector<ParamTensor*>& params) {
    auto entries = parse_checkpoint(io::read_file_bytes(path));
    if (entries.size() != params.size())
        throw std::runtime_error("checkpoint entry count mismatch in " + path);
    for (ParamTensor* p : params) {
        auto it = entries.find(p->name);
        if (it == entries.end())
            throw std::runtime_error("checkpoint missing parameter '" + p->name + "'");
        if (it->second.shape() != p->value.shape())
            throw std::runtime_error("checkpoint shape mismatch for '" + p->name + "'");
        p->value = std::move(it->second);
        p->zero_grad();
    }
}

}  // namespace gcdtc::nn

#endif
