// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace wavevid {

// Geometry shared by encoder, file and decoder: frame size, spatial levels and
// the logical block grid laid over the coefficient plane.
struct BlockLayout {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t levels = 0;
    std::uint32_t block_size = 32;

    BlockLayout() = default;
    BlockLayout(std::uint32_t w, std::uint32_t h, std::uint32_t l, std::uint32_t bs);

    std::uint32_t blocks_x() const { return width / block_size; }
    std::uint32_t blocks_y() const { return height / block_size; }
    std::uint32_t block_count() const { return blocks_x() * blocks_y(); }
    std::uint32_t approx_width() const { return width >> levels; }
    std::uint32_t approx_height() const { return height >> levels; }

    bool in_approx_band(std::uint32_t x, std::uint32_t y) const {
        return x < approx_width() && y < approx_height();
    }
    std::uint32_t block_of(std::uint32_t x, std::uint32_t y) const {
        return (y / block_size) * blocks_x() + x / block_size;
    }
    std::uint16_t offset_of(std::uint32_t x, std::uint32_t y) const {
        return std::uint16_t((y % block_size) * block_size + x % block_size);
    }
    struct Position {
        std::uint32_t x, y;
    };
    Position position_of(std::uint32_t block, std::uint32_t offset) const {
        return {(block % blocks_x()) * block_size + offset % block_size,
                (block / blocks_x()) * block_size + offset / block_size};
    }

    // Local offsets of one block in storage order: frequency rank (lowest
    // first), then row-major offset.
    std::vector<std::uint16_t> storage_order(std::uint32_t block) const;

    friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

}  // namespace wavevid
