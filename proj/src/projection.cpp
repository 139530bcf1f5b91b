// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavevid/error.hpp"

namespace wavevid {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Vec3 rotate_x(const Vec3& v, double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {v[0], c * v[1] + s * v[2], -s * v[1] + c * v[2]};
}

Vec3 rotate_y(const Vec3& v, double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2]};
}

Vec3 rotate_z(const Vec3& v, double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]};
}

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

BitGrid eye_mask(const CameraPose& pose, std::uint32_t mw, std::uint32_t mh) {
    BitGrid hit(mw, mh);
    for (std::uint32_t j = 0; j < mh; ++j)
        for (std::uint32_t i = 0; i < mw; ++i)
            hit(i, j) = in_view(pose, direction_of_pixel(i + 0.5, j + 0.5, mw, mh));

    // Forward direction always lands in a set cell.
    const auto fwd = pixel_of_direction(camera_to_world(pose, {0, 0, 1}), mw, mh);
    hit(std::min(mw - 1, std::uint32_t(fwd[0])) % mw, std::min(mh - 1, std::uint32_t(fwd[1]))) = 1;

    BitGrid out(mw, mh);
    for (std::uint32_t j = 0; j < mh; ++j)
        for (std::uint32_t i = 0; i < mw; ++i) {
            if (!hit(i, j)) continue;
            for (int dj = -1; dj <= 1; ++dj) {
                const int y = int(j) + dj;
                if (y < 0 || y >= int(mh)) continue;
                for (int di = -1; di <= 1; ++di) out((i + mw + di) % mw, y) = 1;
            }
        }
    if (in_view(pose, {0, 1, 0})) std::fill(out.row(0), out.row(0) + mw, std::uint8_t(1));
    if (in_view(pose, {0, -1, 0})) std::fill(out.row(mh - 1), out.row(mh - 1) + mw, std::uint8_t(1));
    return out;
}

}  // namespace

void CameraPose::validate() const {
    if (!(fov_h > 0 && fov_h <= 360)) throw RangeError("horizontal field of view must be in (0, 360]");
    if (!(fov_v > 0 && fov_v <= 180)) throw RangeError("vertical field of view must be in (0, 180]");
    if (!(pitch >= -90 && pitch <= 90)) throw RangeError("pitch must be in [-90, 90]");
    if (!std::isfinite(yaw) || !std::isfinite(roll)) throw RangeError("yaw and roll must be finite");
}

double mapping_factor(std::uint32_t y, std::uint32_t rows) {
    return 1.0 - std::sin(double(y) * kPi / rows);
}

Vec3 direction_of_pixel(double x, double y, std::uint32_t width, std::uint32_t height) {
    const double lon = (x / width * 360.0 - 180.0) * kDeg;
    const double lat = (90.0 - y / height * 180.0) * kDeg;
    return {std::cos(lat) * std::sin(lon), std::sin(lat), std::cos(lat) * std::cos(lon)};
}

std::array<double, 2> pixel_of_direction(const Vec3& d, std::uint32_t width, std::uint32_t height) {
    const double lon = std::atan2(d[0], d[2]) / kDeg;
    const double lat = std::asin(std::clamp(d[1], -1.0, 1.0)) / kDeg;
    double x = (lon + 180.0) / 360.0 * width;
    if (x >= width) x -= width;
    return {x, (90.0 - lat) / 180.0 * height};
}

Vec3 camera_to_world(const CameraPose& pose, const Vec3& v) {
    return rotate_y(rotate_x(rotate_z(v, pose.roll * kDeg), pose.pitch * kDeg), pose.yaw * kDeg);
}

Vec3 world_to_camera(const CameraPose& pose, const Vec3& v) {
    return rotate_z(rotate_x(rotate_y(v, -pose.yaw * kDeg), -pose.pitch * kDeg), -pose.roll * kDeg);
}

bool in_view(const CameraPose& pose, const Vec3& world) {
    const Vec3 c = world_to_camera(pose, world);
    const double az = std::atan2(c[0], c[2]) / kDeg;
    const double el = std::asin(std::clamp(c[1], -1.0, 1.0)) / kDeg;
    constexpr double eps = 1e-9;
    return std::abs(az) <= pose.fov_h / 2 + eps && std::abs(el) <= pose.fov_v / 2 + eps;
}

ViewportMask viewport_to_mask(const CameraPose& pose, std::uint32_t mask_width, std::uint32_t mask_height,
                              bool stereo) {
    pose.validate();
    if (mask_width == 0 || mask_height == 0 || (stereo && mask_height % 2))
        throw DimensionError("invalid mask dimensions");
    if (!stereo) return {eye_mask(pose, mask_width, mask_height)};
    const BitGrid eye = eye_mask(pose, mask_width, mask_height / 2);
    ViewportMask m{BitGrid(mask_width, mask_height)};
    std::copy(eye.data.begin(), eye.data.end(), m.cells.data.begin());
    std::copy(eye.data.begin(), eye.data.end(), m.cells.data.begin() + eye.data.size());
    return m;
}

Frame render_perspective(const DecodedView& region, const CameraPose& pose, std::uint32_t out_width,
                         std::uint32_t out_height, bool stereo, int eye) {
    pose.validate();
    const Frame& src = region.pixels;
    if (!region.coverage.same_shape(BitGrid(src.width, src.height)))
        throw DimensionError("coverage grid does not match the decoded frame");
    if (out_width == 0 || out_height == 0) throw DimensionError("empty output");
    const std::uint32_t W = src.width;
    const std::uint32_t H = stereo ? src.height / 2 : src.height;
    const std::uint32_t y_base = stereo && eye == 1 ? H : 0;
    const bool perspective = pose.fov_h < 180 && pose.fov_v < 180;
    const double tx = std::tan(pose.fov_h / 2 * kDeg), ty = std::tan(pose.fov_v / 2 * kDeg);

    Frame out(out_width, out_height, src.channels);
    for (std::uint32_t py = 0; py < out_height; ++py)
        for (std::uint32_t px = 0; px < out_width; ++px) {
            const double u = (px + 0.5) / out_width * 2 - 1;   // right
            const double v = 1 - (py + 0.5) / out_height * 2;  // up
            Vec3 ray;
            if (perspective) {
                ray = normalized({u * tx, v * ty, 1});
            } else {
                const double az = u * pose.fov_h / 2 * kDeg, el = v * pose.fov_v / 2 * kDeg;
                ray = {std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
            }
            const auto p = pixel_of_direction(camera_to_world(pose, ray), W, H);
            const double fy = std::clamp(p[1], 0.0, double(H - 1));
            const auto x0 = std::uint32_t(std::floor(p[0])) % W, y0 = std::uint32_t(std::floor(fy));
            const std::uint32_t x1 = (x0 + 1) % W, y1 = std::min(y0 + 1, H - 1);
            const double ax = p[0] - std::floor(p[0]), ay = fy - y0;
            const double w[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
            const std::uint32_t xs[4] = {x0, x1, x0, x1}, ys[4] = {y0, y0, y1, y1};
            for (int s = 0; s < 4; ++s)
                if (w[s] > 0 && !region.coverage(xs[s], y_base + ys[s]))
                    throw CoverageError("view samples pixel (" + std::to_string(xs[s]) + ", " +
                                        std::to_string(y_base + ys[s]) + ") outside the decoded region");
            for (std::uint32_t c = 0; c < src.channels; ++c) {
                double acc = 0;
                for (int s = 0; s < 4; ++s) acc += w[s] * src.at(xs[s], y_base + ys[s], c);
                out.at(px, py, c) = std::uint8_t(std::clamp(std::lround(acc), 0L, 255L));
            }
        }
    return out;
}

}  // namespace wavevid
