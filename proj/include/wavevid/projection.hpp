// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include "wavevid/bitstream.hpp"
#include "wavevid/frame.hpp"
#include "wavevid/grid.hpp"

namespace wavevid {

// Viewing direction and field of view, all in degrees.
struct CameraPose {
    double yaw = 0, pitch = 0, roll = 0;
    double fov_h = 90, fov_v = 90;

    // Throws RangeError outside 0 < fov_h <= 360, 0 < fov_v <= 180,
    // |pitch| <= 90.
    void validate() const;
};

using Vec3 = std::array<double, 3>;

// Threshold boost for row y of an equirectangular frame of height rows:
// 1 - sin(y * pi / rows). Zero on the equator, one at the poles.
double mapping_factor(std::uint32_t y, std::uint32_t rows);

// x right, y up, z forward (longitude 0, latitude 0).
Vec3 direction_of_pixel(double x, double y, std::uint32_t width, std::uint32_t height);

// Continuous pixel coordinates of a direction; inverse of direction_of_pixel.
std::array<double, 2> pixel_of_direction(const Vec3& d, std::uint32_t width, std::uint32_t height);

// Rotates camera-space vectors into world space.
Vec3 camera_to_world(const CameraPose& pose, const Vec3& v);
Vec3 world_to_camera(const CameraPose& pose, const Vec3& v);

// True when the world direction lies inside the pose's angular field of view.
bool in_view(const CameraPose& pose, const Vec3& world);

// Cells whose centre direction is in view, dilated by one cell (longitude
// wraps). The pole row is set whenever the pole itself is in view. For stereo
// frames the per-eye mask is stacked twice.
ViewportMask viewport_to_mask(const CameraPose& pose, std::uint32_t mask_width,
                              std::uint32_t mask_height, bool stereo = false);

// Decoded pixels plus the region holding valid data.
struct DecodedView {
    const Frame& pixels;
    const BitGrid& coverage;
};

// Perspective view (angular when a field of view reaches 180 degrees)
// sampled bilinearly from an equirectangular region. Throws CoverageError if a
// sample lands outside the coverage grid.
Frame render_perspective(const DecodedView& region, const CameraPose& pose, std::uint32_t out_width,
                         std::uint32_t out_height, bool stereo = false, int eye = 0);

}  // namespace wavevid
