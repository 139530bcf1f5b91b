// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavevid/decoder.hpp"
#include "wavevid/frame.hpp"
#include "wavevid/projection.hpp"

namespace wavevid {

inline constexpr double kPsnrCap = 99.0;

// Peak signal-to-noise ratio in dB over all channels, restricted to `region`
// when given. Identical inputs report kPsnrCap.
double psnr(const Frame& a, const Frame& b, const BitGrid* region = nullptr);

// Mean SSIM over all 8x8 windows (stride 1) of the channel-mean luminance,
// with K1 = 0.01, K2 = 0.03 and L = 255.
double ssim(const Frame& a, const Frame& b);

struct TrajectorySample {
    double t_ms = 0;
    double yaw = 0, pitch = 0, roll = 0;
    double gaze_u = 0.5, gaze_v = 0.5;
};

// Head and gaze recording. CSV with the header line
// "t_ms,yaw,pitch,roll,gaze_u,gaze_v".
struct TrajectoryLog {
    std::vector<TrajectorySample> samples;

    static TrajectoryLog parse(std::istream& in);
    static TrajectoryLog load(const std::filesystem::path& path);
    void write(std::ostream& out) const;

    // Throws RangeError on non-increasing time, bad angles or gaze.
    void validate() const;

    // Latest sample at or before t_ms (the first one before the log starts).
    const TrajectorySample& at(double t_ms) const;
};

enum class ReplayMode { Full, Viewport, Foveated };

const char* to_string(ReplayMode mode);
ReplayMode parse_replay_mode(const std::string& text);

struct ReplayOptions {
    ReplayMode mode = ReplayMode::Viewport;
    double fov_h = 90, fov_v = 90;
    std::uint32_t runs = 3;          // timed runs; one extra warmup run is discarded
    bool prefetch = true;
    std::uint32_t view_width = 256;  // rendered view used for quality metrics
    std::uint32_t view_height = 256;
    std::optional<FoveationSchedule> schedule;  // default: FoveationSchedule::standard
    unsigned threads = 0;
};

struct FrameReport {
    std::uint32_t frame = 0;
    double ms = 0;  // mean over timed runs
    std::uint64_t bytes = 0;
    std::uint64_t records = 0;
    std::optional<double> psnr;
    std::optional<double> ssim;
};

struct BenchReport {
    ReplayMode mode = ReplayMode::Viewport;
    std::uint32_t runs = 0;
    std::vector<FrameReport> frames;
    double mean_ms = 0;
    double fps = 0;  // 1000 / mean_ms
    std::uint64_t bytes_total = 0;
    std::uint64_t records_total = 0;
    std::uint64_t file_bytes = 0;
    std::uint64_t raw_bytes = 0;
    double compression_ratio = 0;  // raw_bytes / file_bytes
    std::optional<double> psnr_mean;
    std::optional<double> ssim_mean;

    std::string to_text() const;  // key=value lines
    std::string to_json() const;
};

// Decodes every frame of the video under the trajectory in the given mode.
// Quality metrics compare rendered views against the same views of
// `reference` when it is non-empty.
BenchReport replay(const std::filesystem::path& video, const TrajectoryLog& trajectory, const ReplayOptions& options,
                   std::span<const Frame> reference = {});

enum class ClipStyle {
    Smooth,    // drifting colour gradients with a few moving soft-edged shapes
    Detailed,  // adds many small shapes and fine texture on the lower half
};

// Deterministic synthetic content.
std::vector<Frame> synthetic_clip(std::uint32_t width, std::uint32_t height, std::uint32_t frames,
                                  std::uint32_t seed = 1, ClipStyle style = ClipStyle::Smooth);

}  // namespace wavevid
