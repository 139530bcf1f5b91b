// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wavevid {

// Dense row-major 2D grid. Used for float sample planes and for binary masks.
template <typename T>
struct Grid {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::uint32_t w, std::uint32_t h, T fill = T{})
        : width(w), height(h), data(std::size_t(w) * h, fill) {}

    T& operator()(std::uint32_t x, std::uint32_t y) { return data[std::size_t(y) * width + x]; }
    const T& operator()(std::uint32_t x, std::uint32_t y) const {
        return data[std::size_t(y) * width + x];
    }
    T* row(std::uint32_t y) { return data.data() + std::size_t(y) * width; }
    const T* row(std::uint32_t y) const { return data.data() + std::size_t(y) * width; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Grid& o) const { return width == o.width && height == o.height; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

using Plane = Grid<float>;

// Binary mask; cells hold 0 or 1.
using BitGrid = Grid<std::uint8_t>;

std::size_t count_set(const BitGrid& g);
bool is_subset(const BitGrid& a, const BitGrid& b);
BitGrid intersect(const BitGrid& a, const BitGrid& b);
BitGrid unite(const BitGrid& a, const BitGrid& b);

// Coarse cell set if any of its 2x2 children is set.
BitGrid downmap(const BitGrid& fine);

// Nearest-neighbour enlargement to (width, height); both must be integer
// multiples of the source dimensions.
BitGrid upmap(const BitGrid& coarse, std::uint32_t width, std::uint32_t height);

// Chebyshev-distance dilation, clamped at the borders.
BitGrid dilate(const BitGrid& g, std::uint32_t radius);

// Calls fn(begin, end) for every maximal run of set cells in row[0, n).
template <typename Fn>
void for_each_run(const std::uint8_t* row, std::uint32_t n, Fn&& fn) {
    std::uint32_t x = 0;
    while (x < n) {
        while (x < n && !row[x]) ++x;
        if (x == n) break;
        std::uint32_t begin = x;
        while (x < n && row[x]) ++x;
        fn(begin, x);
    }
}

}  // namespace wavevid
