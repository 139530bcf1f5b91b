// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "wavevid/grid.hpp"

namespace wavevid {

// 8-bit image with interleaved channels.
struct Frame {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    std::vector<std::uint8_t> pixels;

    Frame() = default;
    Frame(std::uint32_t w, std::uint32_t h, std::uint32_t c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c, fill) {}

    std::uint8_t& at(std::uint32_t x, std::uint32_t y, std::uint32_t c) {
        return pixels[(std::size_t(y) * width + x) * channels + c];
    }
    std::uint8_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
        return pixels[(std::size_t(y) * width + x) * channels + c];
    }
    bool same_shape(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
    std::size_t byte_size() const { return pixels.size(); }

    friend bool operator==(const Frame&, const Frame&) = default;
};

// One [0,1]-scaled float plane per channel.
std::vector<Plane> to_planes(const Frame& frame);

// Rounds and clamps to 8 bits. Pixels outside `keep` (when given) are zero.
Frame from_planes(const std::vector<Plane>& planes, const BitGrid* keep = nullptr);

}  // namespace wavevid
