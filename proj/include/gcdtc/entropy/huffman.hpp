#ifndef GCDTC_ENTROPY_HUFFMAN_HPP
#define GCDTC_ENTROPY_HUFFMAN_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcdtc/entropy/bitstream.hpp"
#include "gcdtc/util/bytes.hpp"

namespace gcdtc::entropy {

// Canonical Huffman table over signed integer symbols. Construction is fully
// deterministic: the tree build breaks weight ties by node creation order
// (leaves enter in ascending symbol order), and canonical codes are assigned
// in (length, symbol) order. A one-symbol alphabet gets a length-1 code so
// pure-repetition streams remain decodable.
class HuffmanTable {
  public:
    HuffmanTable() = default;

    static HuffmanTable from_counts(const std::map<int64_t, uint64_t>& counts) {
        if (counts.empty()) return HuffmanTable{};
        for (const auto& [sym, cnt] : counts)
            if (cnt == 0)
                throw std::invalid_argument("symbol " + std::to_string(sym) + " has zero count");

        HuffmanTable t;
        t.symbols_.reserve(counts.size());
        for (const auto& [sym, cnt] : counts) t.symbols_.push_back(sym);

        if (counts.size() == 1) {
            t.lengths_ = {1};
        } else {
            t.lengths_ = build_lengths(counts);
        }
        t.assign_canonical_codes();
        return t;
    }

    bool empty() const { return symbols_.empty(); }
    size_t alphabet_size() const { return symbols_.size(); }
    const std::vector<int64_t>& symbols() const { return symbols_; }
    const std::vector<uint8_t>& lengths() const { return lengths_; }

    uint8_t length_of(int64_t symbol) const {
        size_t i = index_of(symbol);
        return lengths_[i];
    }

    void encode_symbol(int64_t symbol, BitWriter& bw) const {
        size_t i = index_of(symbol);
        bw.put_bits(codes_[i], lengths_[i]);
    }

    int64_t decode_symbol(BitReader& br) const {
        uint64_t code = 0;
        int len = 0;
        while (len < 64) {
            code = (code << 1) | static_cast<uint64_t>(br.get_bit());
            ++len;
            if (len > max_len_) break;
            if (count_by_len_[len] == 0) continue;
            uint64_t first = first_code_[len];
            uint64_t offset = code - first;
            if (code >= first && offset < count_by_len_[len])
                return symbols_[order_[first_index_[len] + offset]];
        }
        throw std::runtime_error("corrupt Huffman stream: no code matched");
    }

    // Table blob: u32 alphabet size, zigzag-varint first symbol, varint deltas
    // (minus one) for the remaining sorted symbols, then one length byte each.
    void serialize(ByteWriter& w) const {
        w.u32(static_cast<uint32_t>(symbols_.size()));
        for (size_t i = 0; i < symbols_.size(); ++i) {
            if (i == 0)
                w.varint_signed(symbols_[0]);
            else
                w.varint(static_cast<uint64_t>(symbols_[i] - symbols_[i - 1]) - 1);
        }
        for (uint8_t len : lengths_) w.u8(len);
    }

    static HuffmanTable deserialize(ByteReader& r) {
        HuffmanTable t;
        uint32_t m = r.u32();
        t.symbols_.resize(m);
        for (uint32_t i = 0; i < m; ++i) {
            if (i == 0)
                t.symbols_[0] = r.varint_signed();
            else
                t.symbols_[i] = t.symbols_[i - 1] + static_cast<int64_t>(r.varint()) + 1;
        }
        t.lengths_.resize(m);
        for (uint32_t i = 0; i < m; ++i) {
            t.lengths_[i] = r.u8();
            if (m > 0 && (t.lengths_[i] == 0 || t.lengths_[i] > 63))
                throw std::runtime_error("corrupt Huffman table: bad code length");
        }
        if (m > 0) t.assign_canonical_codes();
        return t;
    }

    size_t serialized_bytes() const {
        ByteWriter w;
        serialize(w);
        return w.size();
    }

  private:
    static std::vector<uint8_t> build_lengths(const std::map<int64_t, uint64_t>& counts) {
        struct HeapItem {
            uint64_t weight;
            uint32_t seq;
            uint32_t node;
        };
        auto cmp = [](const HeapItem& a, const HeapItem& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.seq > b.seq;
        };
        std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(cmp)> heap(cmp);

        size_t n = counts.size();
        std::vector<int32_t> parent(2 * n - 1, -1);
        uint32_t next = 0;
        for (const auto& [sym, cnt] : counts) {
            heap.push({cnt, next, next});
            ++next;
        }
        while (heap.size() > 1) {
            HeapItem a = heap.top();
            heap.pop();
            HeapItem b = heap.top();
            heap.pop();
            uint32_t id = next++;
            parent[a.node] = static_cast<int32_t>(id);
            parent[b.node] = static_cast<int32_t>(id);
            heap.push({a.weight + b.weight, id, id});
        }

        std::vector<uint8_t> lengths(n);
        for (size_t i = 0; i < n; ++i) {
            int depth = 0;
            int32_t cur = parent[i];
            while (cur != -1) {
                ++depth;
                cur = parent[cur];
            }
            if (depth > 63) throw std::runtime_error("Huffman code length exceeds 63 bits");
            lengths[i] = static_cast<uint8_t>(depth);
        }
        return lengths;
    }

    void assign_canonical_codes() {
        size_t n = symbols_.size();
        order_.resize(n);
        for (size_t i = 0; i < n; ++i) order_[i] = static_cast<uint32_t>(i);
        std::sort(order_.begin(), order_.end(), [&](uint32_t a, uint32_t b) {
            if (lengths_[a] != lengths_[b]) return lengths_[a] < lengths_[b];
            return symbols_[a] < symbols_[b];
        });

        max_len_ = 0;
        for (uint8_t len : lengths_) max_len_ = std::max<int>(max_len_, len);
        codes_.assign(n, 0);
        first_code_.assign(max_len_ + 1, 0);
        first_index_.assign(max_len_ + 1, 0);
        count_by_len_.assign(max_len_ + 1, 0);

        uint64_t code = 0;
        int prev_len = 0;
        for (size_t k = 0; k < n; ++k) {
            uint32_t i = order_[k];
            int len = lengths_[i];
            code <<= (len - prev_len);
            if (count_by_len_[len] == 0) {
                first_code_[len] = code;
                first_index_[len] = static_cast<uint32_t>(k);
            }
            ++count_by_len_[len];
            codes_[i] = code;
            ++code;
            prev_len = len;
        }
    }

    size_t index_of(int64_t symbol) const {
        auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
        if (it == symbols_.end() || *it != symbol)
            throw std::runtime_error("symbol " + std::to_string(symbol) + " absent from table");
        return static_cast<size_t>(it - symbols_.begin());
    }

    std::vector<int64_t> symbols_;   // ascending
    std::vector<uint8_t> lengths_;   // parallel to symbols_
    std::vector<uint64_t> codes_;    // parallel to symbols_
    std::vector<uint32_t> order_;    // canonical (length, symbol) order
    std::vector<uint64_t> first_code_;
    std::vector<uint32_t> first_index_;
    std::vector<uint64_t> count_by_len_;
    int max_len_ = 0;
};

// Stream layout: u32 symbol count n, table blob, packed bits (byte-aligned at
// the end). Decoding consumes exactly the stream's bytes, so streams can be
// concatenated back to back.
struct EncodedStream {
    std::vector<uint8_t> bytes;
    size_t table_bytes = 0;  // for compression-ratio accounting
};

inline EncodedStream huffman_encode_stream(const std::vector<int64_t>& symbols) {
    std::map<int64_t, uint64_t> counts;
    for (int64_t s : symbols) ++counts[s];
    HuffmanTable table = HuffmanTable::from_counts(counts);

    ByteWriter w;
    w.u32(static_cast<uint32_t>(symbols.size()));
    size_t before = w.size();
    table.serialize(w);
    EncodedStream out;
    out.table_bytes = w.size() - before;

    BitWriter bw;
    for (int64_t s : symbols) table.encode_symbol(s, bw);
    w.bytes(bw.bytes());
    out.bytes = w.take();
    return out;
}

inline std::vector<int64_t> huffman_decode_stream(ByteReader& r) {
    uint32_t n = r.u32();
    HuffmanTable table = HuffmanTable::deserialize(r);
    std::vector<int64_t> symbols;
    symbols.reserve(n);
    if (n > 0) {
        BitReader br(r.cursor(), r.remaining());
        for (uint32_t i = 0; i < n; ++i) symbols.push_back(table.decode_symbol(br));
        r.skip(br.bytes_consumed());
    }
    return symbols;
}

inline std::vector<int64_t> huffman_decode_stream(const std::vector<uint8_t>& bytes) {
    ByteReader r(bytes);
    return huffman_decode_stream(r);
}

}  // namespace gcdtc::entropy

#endif
