#ifndef GCDTC_UTIL_CRC32_HPP
#define GCDTC_UTIL_CRC32_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gcdtc {

namespace detail {

constexpr std::array<uint32_t, 256> make_crc32_table() {
    std::array<uint32_t, 256> table{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}

inline constexpr auto crc32_table = make_crc32_table();

}  // namespace detail

// CRC-32 (IEEE, reflected), same polynomial/convention as zlib.
inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0) {
    uint32_t c = seed ^ 0xffffffffu;
    for (size_t i = 0; i < n; ++i) c = detail::crc32_table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

inline uint32_t crc32(const std::vector<uint8_t>& v, uint32_t seed = 0) {
    return crc32(v.data(), v.size(), seed);
}

}  // namespace gcdtc

#endif
