#ifndef GCDTC_IO_RAW_HPP
#define GCDTC_IO_RAW_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcdtc/core/field.hpp"
#include "gcdtc/util/bytes.hpp"

namespace gcdtc::io {

// .gsd raw container: magic "GSD1", dtype u8 (0=f32, 1=f64), member count u32,
// per-member (T,H,W) u32 triples, then the members' samples back to back.
// Everything little-endian.

enum class RawDtype : uint8_t { f32 = 0, f64 = 1 };

struct RawHeader {
    RawDtype dtype = RawDtype::f64;
    std::vector<std::array<uint32_t, 3>> shapes;  // (T, H, W) per member

    size_t header_bytes() const { return 4 + 1 + 4 + 12 * shapes.size(); }

    size_t payload_bytes() const {
        size_t width = dtype == RawDtype::f32 ? 4 : 8;
        size_t n = 0;
        for (const auto& s : shapes)
            n += static_cast<size_t>(s[0]) * s[1] * s[2] * width;
        return n;
    }
};

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    std::streamoff n = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> buf(static_cast<size_t>(n));
    if (n > 0) in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) throw std::runtime_error("failed reading file: " + path);
    return buf;
}

inline void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failure: " + path);
}

inline size_t write_raw(const std::vector<TensorField>& fields, const std::string& path,
                        RawDtype dtype = RawDtype::f64) {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("GSD1"), 4);
    w.u8(static_cast<uint8_t>(dtype));
    w.u32(static_cast<uint32_t>(fields.size()));
    for (const auto& f : fields) {
        f.validate();
        w.u32(static_cast<uint32_t>(f.t_len));
        w.u32(static_cast<uint32_t>(f.height));
        w.u32(static_cast<uint32_t>(f.width));
    }
    for (const auto& f : fields) {
        if (dtype == RawDtype::f32) {
            for (double v : f.values) w.f32(static_cast<float>(v));
        } else {
            for (double v : f.values) w.f64(v);
        }
    }
    write_file_bytes(path, w.data());
    return w.size();
}

inline std::vector<TensorField> parse_raw(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    char magic[4];
    r.raw(reinterpret_cast<uint8_t*>(magic), 4);
    if (std::string(magic, 4) != "GSD1") throw std::runtime_error("bad magic: not a GSD1 file");
    uint8_t code = r.u8();
    if (code > 1) throw std::runtime_error("unknown dtype code " + std::to_string(code));
    RawDtype dtype = static_cast<RawDtype>(code);
    uint32_t count = r.u32();

    RawHeader hdr;
    hdr.dtype = dtype;
    hdr.shapes.resize(count);
    for (auto& s : hdr.shapes) {
        s[0] = r.u32();
        s[1] = r.u32();
        s[2] = r.u32();
    }
    if (r.remaining() != hdr.payload_bytes()) throw std::runtime_error("truncated payload");

    std::vector<TensorField> fields;
    fields.reserve(count);
    for (uint32_t m = 0; m < count; ++m) {
        const auto& s = hdr.shapes[m];
        TensorField f = make_field(static_cast<int>(m), static_cast<int>(s[0]),
                                   static_cast<int>(s[1]), static_cast<int>(s[2]));
        for (double& v : f.values)
            v = dtype == RawDtype::f32 ? static_cast<double>(r.f32()) : r.f64();
        f.compute_value_range();
        fields.push_back(std::move(f));
    }
    return fields;
}

inline std::vector<TensorField> read_raw(const std::string& path) {
    return parse_raw(read_file_bytes(path));
}

}  // namespace gcdtc::io

#endif
