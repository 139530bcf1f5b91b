// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/frame.hpp"

#include <algorithm>
#include <cmath>

#include "wavevid/error.hpp"

namespace wavevid {

std::vector<Plane> to_planes(const Frame& frame) {
    std::vector<Plane> planes(frame.channels, Plane(frame.width, frame.height));
    const std::size_t n = std::size_t(frame.width) * frame.height;
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t c = 0; c < frame.channels; ++c)
            planes[c].data[i] = frame.pixels[i * frame.channels + c] / 255.0f;
    return planes;
}

Frame from_planes(const std::vector<Plane>& planes, const BitGrid* keep) {
    if (planes.empty()) return {};
    const auto w = planes[0].width, h = planes[0].height;
    for (const auto& p : planes)
        if (p.width != w || p.height != h) throw DimensionError("channel planes differ in size");
    if (keep && (keep->width != w || keep->height != h)) throw DimensionError("keep mask size mismatch");
    Frame out(w, h, std::uint32_t(planes.size()));
    const std::size_t n = std::size_t(w) * h;
    for (std::size_t i = 0; i < n; ++i) {
        if (keep && !keep->data[i]) continue;
        for (std::size_t c = 0; c < planes.size(); ++c) {
            const float v = std::round(planes[c].data[i] * 255.0f);
            out.pixels[i * planes.size() + c] = std::uint8_t(std::clamp(v, 0.0f, 255.0f));
        }
    }
    return out;
}

}  // namespace wavevid
