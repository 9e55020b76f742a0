#ifndef GCDTC_ENTROPY_BITSTREAM_HPP
#define GCDTC_ENTROPY_BITSTREAM_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gcdtc::entropy {

// Packed bits, MSB-first within bytes; trailing pad bits are zero.
class BitWriter {
  public:
    void put_bit(int bit) {
        if (bit_pos_ == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<uint8_t>(1u << (7 - bit_pos_));
        bit_pos_ = (bit_pos_ + 1) & 7;
        ++bit_count_;
    }

    // Writes the low `len` bits of `code`, most significant first.
    void put_bits(uint64_t code, int len) {
        for (int i = len - 1; i >= 0; --i) put_bit(static_cast<int>((code >> i) & 1));
    }

    size_t bit_count() const { return bit_count_; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }
    std::vector<uint8_t> take() { return std::move(bytes_); }

  private:
    std::vector<uint8_t> bytes_;
    int bit_pos_ = 0;
    size_t bit_count_ = 0;
};

class BitReader {
  public:
    BitReader(const uint8_t* data, size_t byte_count) : data_(data), byte_count_(byte_count) {}

    int get_bit() {
        size_t byte = bit_ >> 3;
        if (byte >= byte_count_) throw std::runtime_error("truncated bit stream");
        int b = (data_[byte] >> (7 - (bit_ & 7))) & 1;
        ++bit_;
        return b;
    }

    size_t bits_read() const { return bit_; }
    size_t bytes_consumed() const { return (bit_ + 7) >> 3; }

  private:
    const uint8_t* data_;
    size_t byte_count_;
    size_t bit_ = 0;
};

}  // namespace gcdtc::entropy

#endif
