// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/grid.hpp"

#include <algorithm>

#include "wavevid/error.hpp"

namespace wavevid {

std::size_t count_set(const BitGrid& g) {
    return std::size_t(std::count_if(g.data.begin(), g.data.end(), [](auto v) { return v != 0; }));
}

bool is_subset(const BitGrid& a, const BitGrid& b) {
    if (!a.same_shape(b)) throw DimensionError("mask shapes differ");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data[i] && !b.data[i]) return false;
    return true;
}

BitGrid intersect(const BitGrid& a, const BitGrid& b) {
    if (!a.same_shape(b)) throw DimensionError("mask shapes differ");
    BitGrid out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] && b.data[i];
    return out;
}

BitGrid unite(const BitGrid& a, const BitGrid& b) {
    if (!a.same_shape(b)) throw DimensionError("mask shapes differ");
    BitGrid out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] || b.data[i];
    return out;
}

BitGrid downmap(const BitGrid& fine) {
    BitGrid coarse((fine.width + 1) / 2, (fine.height + 1) / 2);
    for (std::uint32_t y = 0; y < fine.height; ++y) {
        const auto* src = fine.row(y);
        auto* dst = coarse.row(y / 2);
        for (std::uint32_t x = 0; x < fine.width; ++x)
            if (src[x]) dst[x / 2] = 1;
    }
    return coarse;
}

BitGrid upmap(const BitGrid& coarse, std::uint32_t width, std::uint32_t height) {
    if (coarse.width == 0 || coarse.height == 0 || width % coarse.width || height % coarse.height)
        throw DimensionError("upmap target must be a multiple of the mask size");
    const std::uint32_t sx = width / coarse.width, sy = height / coarse.height;
    BitGrid fine(width, height);
    for (std::uint32_t y = 0; y < height; ++y) {
        const auto* src = coarse.row(y / sy);
        auto* dst = fine.row(y);
        for (std::uint32_t x = 0; x < width; ++x) dst[x] = src[x / sx];
    }
    return fine;
}

namespace {

// out[i] = any(in[j] for |i - j| <= r) along one line.
void dilate_line(const std::uint8_t* in, std::size_t in_stride, std::uint8_t* out,
                 std::size_t out_stride, std::uint32_t n, std::uint32_t r) {
    // Distance to the most recent set cell on the left, then a right sweep.
    std::int64_t last = -(std::int64_t(r) + 1) - 1;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (in[i * in_stride]) last = i;
        out[i * out_stride] = (std::int64_t(i) - last) <= std::int64_t(r);
    }
    std::int64_t next = std::int64_t(n) + r + 1;
    for (std::int64_t i = std::int64_t(n) - 1; i >= 0; --i) {
        if (in[i * in_stride]) next = i;
        if (next - i <= std::int64_t(r)) out[i * out_stride] = 1;
    }
}

}  // namespace

BitGrid dilate(const BitGrid& g, std::uint32_t radius) {
    if (radius == 0) return g;
    BitGrid rows(g.width, g.height);
    for (std::uint32_t y = 0; y < g.height; ++y) dilate_line(g.row(y), 1, rows.row(y), 1, g.width, radius);
    BitGrid out(g.width, g.height);
    for (std::uint32_t x = 0; x < g.width; ++x)
        dilate_line(rows.data.data() + x, g.width, out.data.data() + x, g.width, g.height, radius);
    return out;
}

}  // namespace wavevid
