#ifndef GCDTC_CORE_BLOCKS_HPP
#define GCDTC_CORE_BLOCKS_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "gcdtc/core/field.hpp"

namespace gcdtc {

struct BlockOrigin {
    int member_id = 0;
    int t0 = 0;
    int y0 = 0;
    int x0 = 0;

    auto key() const { return std::tie(member_id, t0, y0, x0); }
    bool operator==(const BlockOrigin& o) const { return key() == o.key(); }
    bool operator<(const BlockOrigin& o) const { return key() < o.key(); }

    std::string to_string() const {
        return "(" + std::to_string(member_id) + "," + std::to_string(t0) + "," +
               std::to_string(y0) + "," + std::to_string(x0) + ")";
    }
};

// A D x H_b x W_b tile; boundary tiles carry edge-replicated padding.
struct Block3D {
    BlockOrigin origin;
    int d = 0;
    int h = 0;
    int w = 0;
    std::vector<double> values;  // row-major (d, y, x)

    double& at(int t, int y, int x) {
        return values[(static_cast<size_t>(t) * h + y) * w + x];
    }
    double at(int t, int y, int x) const {
        return values[(static_cast<size_t>(t) * h + y) * w + x];
    }
};

// Partition metadata enabling exact reassembly. Blocks are ordered
// lexicographically by origin (member, t0, y0, x0).
struct BlockGrid {
    int member_id = 0;
    int field_t = 0, field_h = 0, field_w = 0;
    int block_d = 0, block_h = 0, block_w = 0;
    int tiles_t = 0, tiles_y = 0, tiles_x = 0;
    int pad_t = 0, pad_y = 0, pad_x = 0;  // trailing padding, < block size per axis

    int block_count() const { return tiles_t * tiles_y * tiles_x; }
};

inline std::pair<std::vector<Block3D>, BlockGrid> partition(const TensorField& field, int block_d,
                                                            int block_h, int block_w) {
    field.validate();
    if (block_d < 1 || block_h < 1 || block_w < 1)
        throw std::invalid_argument("block shape components must be >= 1");

    BlockGrid grid;
    grid.member_id = field.member_id;
    grid.field_t = field.t_len;
    grid.field_h = field.height;
    grid.field_w = field.width;
    grid.block_d = block_d;
    grid.block_h = block_h;
    grid.block_w = block_w;
    grid.tiles_t = (field.t_len + block_d - 1) / block_d;
    grid.tiles_y = (field.height + block_h - 1) / block_h;
    grid.tiles_x = (field.width + block_w - 1) / block_w;
    grid.pad_t = grid.tiles_t * block_d - field.t_len;
    grid.pad_y = grid.tiles_y * block_h - field.height;
    grid.pad_x = grid.tiles_x * block_w - field.width;

    std::vector<Block3D> blocks;
    blocks.reserve(grid.block_count());
    for (int bt = 0; bt < grid.tiles_t; ++bt) {
        for (int by = 0; by < grid.tiles_y; ++by) {
            for (int bx = 0; bx < grid.tiles_x; ++bx) {
                Block3D blk;
                blk.origin = BlockOrigin{field.member_id, bt * block_d, by * block_h, bx * block_w};
                blk.d = block_d;
                blk.h = block_h;
                blk.w = block_w;
                blk.values.resize(static_cast<size_t>(block_d) * block_h * block_w);
                for (int t = 0; t < block_d; ++t) {
                    int ft = std::min(blk.origin.t0 + t, field.t_len - 1);
                    for (int y = 0; y < block_h; ++y) {
                        int fy = std::min(blk.origin.y0 + y, field.height - 1);
                        for (int x = 0; x < block_w; ++x) {
                            int fx = std::min(blk.origin.x0 + x, field.width - 1);
                            blk.at(t, y, x) = field.at(ft, fy, fx);
                        }
                    }
                }
                blocks.push_back(std::move(blk));
            }
        }
    }
    return {std::move(blocks), grid};
}

// Inverse of partition(): padding is discarded, placement is keyed by origin
// so the block list order does not matter.
inline TensorField reassemble(const std::vector<Block3D>& blocks, const BlockGrid& grid) {
    if (static_cast<int>(blocks.size()) != grid.block_count())
        throw std::invalid_argument("block count does not match grid (" +
                                    std::to_string(blocks.size()) + " vs " +
                                    std::to_string(grid.block_count()) + ")");

    TensorField field = make_field(grid.member_id, grid.field_t, grid.field_h, grid.field_w);
    std::vector<bool> seen(blocks.size(), false);
    for (const Block3D& blk : blocks) {
        if (blk.origin.member_id != grid.member_id)
            throw std::invalid_argument("block origin mismatch: " + blk.origin.to_string());
        if (blk.d != grid.block_d || blk.h != grid.block_h || blk.w != grid.block_w)
            throw std::invalid_argument("block shape mismatch at " + blk.origin.to_string());
        if (blk.origin.t0 % grid.block_d || blk.origin.y0 % grid.block_h ||
            blk.origin.x0 % grid.block_w)
            throw std::invalid_argument("block origin mismatch: " + blk.origin.to_string());
        int bt = blk.origin.t0 / grid.block_d;
        int by = blk.origin.y0 / grid.block_h;
        int bx = blk.origin.x0 / grid.block_w;
        if (bt >= grid.tiles_t || by >= grid.tiles_y || bx >= grid.tiles_x)
            throw std::invalid_argument("block origin mismatch: " + blk.origin.to_string());
        size_t idx = (static_cast<size_t>(bt) * grid.tiles_y + by) * grid.tiles_x + bx;
        if (seen[idx])
            throw std::invalid_argument("duplicate block at " + blk.origin.to_string());
        seen[idx] = true;

        int dmax = std::min(grid.block_d, grid.field_t - blk.origin.t0);
        int hmax = std::min(grid.block_h, grid.field_h - blk.origin.y0);
        int wmax = std::min(grid.block_w, grid.field_w - blk.origin.x0);
        for (int t = 0; t < dmax; ++t)
            for (int y = 0; y < hmax; ++y)
                for (int x = 0; x < wmax; ++x)
                    field.at(blk.origin.t0 + t, blk.origin.y0 + y, blk.origin.x0 + x) =
                        blk.at(t, y, x);
    }
    for (size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) throw std::invalid_argument("missing block at grid index " + std::to_string(i));
    }
    field.compute_value_range();
    return field;
}

}  // namespace gcdtc

#endif
