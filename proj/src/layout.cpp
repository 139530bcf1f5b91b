// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/layout.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "wavevid/error.hpp"
#include "wavevid/wavelet.hpp"

namespace wavevid {

BlockLayout::BlockLayout(std::uint32_t w, std::uint32_t h, std::uint32_t l, std::uint32_t bs)
    : width(w), height(h), levels(l), block_size(bs) {
    check_pyramid_shape(w, h, l);
    if (bs == 0 || !std::has_single_bit(bs) || bs > 256)
        throw RangeError("block size must be a power of two no larger than 256");
    if (w % bs || h % bs)
        throw DimensionError("block size " + std::to_string(bs) + " does not divide the frame");
}

std::vector<std::uint16_t> BlockLayout::storage_order(std::uint32_t block) const {
    const std::uint32_t n = block_size * block_size;
    std::vector<std::uint16_t> order(n);
    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t off = 0; off < n; ++off) {
        order[off] = std::uint16_t(off);
        const auto p = position_of(block, off);
        rank[off] = frequency_rank(p.x, p.y, levels, width, height);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint16_t a, std::uint16_t b) { return rank[a] < rank[b]; });
    return order;
}

}  // namespace wavevid
