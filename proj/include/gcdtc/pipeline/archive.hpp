#ifndef GCDTC_PIPELINE_ARCHIVE_HPP
#define GCDTC_PIPELINE_ARCHIVE_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gcdtc/util/bytes.hpp"
#include "gcdtc/util/crc32.hpp"

namespace gcdtc::pipeline {

// .gcdt archive. Byte-exact layout (all integers little-endian):
//
//   magic "GCDT" (4) | version u16 | codec kind u8 (0=gcd, 1=gcae) | pad u8
//   block shape u32 x3 | guard shape u32 x3
//   diffusion steps u32 | beta_min f64 | beta_max f64
//   quant_b u32 | quant_a u32 | tc_trace_len u32 | tau f64
//   member count u32, then per member: (T,H,W) u32 x3, norm min f64, max f64
//   model count u32, then per model: name (u16 len + bytes), bytes u64, crc u32
//   sections, each: tag u8 (1 latents, 2 corrections, 3 basis) | length u64 | payload
//   crc32 u32 over every preceding byte

inline constexpr uint16_t kArchiveVersion = 1;

enum class CodecKind : uint8_t { gcd = 0, gcae = 1 };

struct MemberInfo {
    uint32_t t_len = 0, height = 0, width = 0;
    double norm_min = 0.0, norm_max = 0.0;
};

struct ModelFingerprint {
    std::string name;
    uint64_t bytes = 0;
    uint32_t crc = 0;

    bool operator==(const ModelFingerprint& o) const {
        return name == o.name && bytes == o.bytes && crc == o.crc;
    }
};

struct ArchiveHeader {
    CodecKind kind = CodecKind::gcd;
    uint32_t block_d = 0, block_h = 0, block_w = 0;
    uint32_t guard_d = 0, guard_h = 0, guard_w = 0;
    uint32_t steps = 0;
    double beta_min = 0.0, beta_max = 0.0;
    uint32_t quant_b = 0, quant_a = 0;
    uint32_t tc_trace_len = 0;
    double tau = 0.0;
    std::vector<MemberInfo> members;
    std::vector<ModelFingerprint> models;

    uint64_t model_bytes() const {
        uint64_t n = 0;
        for (const auto& m : models) n += m.bytes;
        return n;
    }
};

struct Archive {
    ArchiveHeader header;
    std::vector<uint8_t> latent_stream;
    std::vector<uint8_t> correction_stream;
    std::vector<uint8_t> basis_blob;

    std::vector<uint8_t> serialize() const {
        ByteWriter w;
        w.bytes(reinterpret_cast<const uint8_t*>("GCDT"), 4);
        w.u16(kArchiveVersion);
        w.u8(static_cast<uint8_t>(header.kind));
        w.u8(0);
        w.u32(header.block_d);
        w.u32(header.block_h);
        w.u32(header.block_w);
        w.u32(header.guard_d);
        w.u32(header.guard_h);
        w.u32(header.guard_w);
        w.u32(header.steps);
        w.f64(header.beta_min);
        w.f64(header.beta_max);
        w.u32(header.quant_b);
        w.u32(header.quant_a);
        w.u32(header.tc_trace_len);
        w.f64(header.tau);
        w.u32(static_cast<uint32_t>(header.members.size()));
        for (const auto& m : header.members) {
            w.u32(m.t_len);
            w.u32(m.height);
            w.u32(m.width);
            w.f64(m.norm_min);
            w.f64(m.norm_max);
        }
        w.u32(static_cast<uint32_t>(header.models.size()));
        for (const auto& m : header.models) {
            w.str(m.name);
            w.u64(m.bytes);
            w.u32(m.crc);
        }
        auto section = [&w](uint8_t tag, const std::vector<uint8_t>& payload) {
            w.u8(tag);
            w.u64(payload.size());
            w.bytes(payload);
        };
        section(1, latent_stream);
        section(2, correction_stream);
        section(3, basis_blob);
        w.u32(crc32(w.data()));
        return w.take();
    }

    static Archive parse(const std::vector<uint8_t>& bytes) {
        if (bytes.size() < 4) throw std::runtime_error("archive too short");
        {
            ByteReader tail(bytes.data() + bytes.size() - 4, 4);
            if (crc32(bytes.data(), bytes.size() - 4) != tail.u32())
                throw std::runtime_error("archive CRC mismatch (corrupt file)");
        }
        ByteReader r(bytes.data(), bytes.size() - 4);
        char magic[4];
        r.raw(reinterpret_cast<uint8_t*>(magic), 4);
        if (std::string(magic, 4) != "GCDT")
            throw std::runtime_error("bad magic: not a GCDT archive");
        if (r.u16() != kArchiveVersion) throw std::runtime_error("archive version mismatch");

        Archive a;
        uint8_t kind = r.u8();
        if (kind > 1) throw std::runtime_error("unknown codec kind");
        a.header.kind = static_cast<CodecKind>(kind);
        r.u8();
        a.header.block_d = r.u32();
        a.header.block_h = r.u32();
        a.header.block_w = r.u32();
        a.header.guard_d = r.u32();
        a.header.guard_h = r.u32();
        a.header.guard_w = r.u32();
        a.header.steps = r.u32();
        a.header.beta_min = r.f64();
        a.header.beta_max = r.f64();
        a.header.quant_b = r.u32();
        a.header.quant_a = r.u32();
        a.header.tc_trace_len = r.u32();
        a.header.tau = r.f64();
        uint32_t members = r.u32();
        a.header.members.resize(members);
        for (auto& m : a.header.members) {
            m.t_len = r.u32();
            m.height = r.u32();
            m.width = r.u32();
            m.norm_min = r.f64();
            m.norm_max = r.f64();
        }
        uint32_t models = r.u32();
        a.header.models.resize(models);
        for (auto& m : a.header.models) {
            m.name = r.str();
            m.bytes = r.u64();
            m.crc = r.u32();
        }
        while (r.remaining() > 0) {
            uint8_t tag = r.u8();
            uint64_t len = r.u64();
            if (len > r.remaining()) throw std::runtime_error("truncated archive section");
            std::vector<uint8_t> payload(len);
            r.raw(payload.data(), len);
            switch (tag) {
                case 1: a.latent_stream = std::move(payload); break;
                case 2: a.correction_stream = std::move(payload); break;
                case 3: a.basis_blob = std::move(payload); break;
                default: throw std::runtime_error("unknown archive section tag");
            }
        }
        return a;
    }
};

// Byte breakdown of everything a decoder needs. "tables" covers the entropy
// tables plus the archive container metadata (header, framing, CRC); "model"
// is the checkpoint files alone.
struct ByteBreakdown {
    uint64_t latent = 0;
    uint64_t corrections = 0;
    uint64_t basis = 0;
    uint64_t model = 0;
    uint64_t tables = 0;

    uint64_t total() const { return latent + corrections + basis + model + tables; }
};

}  // namespace gcdtc::pipeline

#endif
