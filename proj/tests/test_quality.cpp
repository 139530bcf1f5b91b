// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "wavevid/bitstream.hpp"
#include "wavevid/encoder.hpp"
#include "wavevid/error.hpp"
#include "wavevid/quality.hpp"

using namespace wavevid;

namespace {

Frame filled(std::uint32_t w, std::uint32_t h, std::uint8_t v, std::uint32_t c = 3) {
    Frame f(w, h, c);
    std::fill(f.pixels.begin(), f.pixels.end(), v);
    return f;
}

Frame noise(std::uint32_t w, std::uint32_t h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> u(0, 255);
    Frame f(w, h, 3);
    for (auto& v : f.pixels) v = std::uint8_t(u(rng));
    return f;
}

double psnr_oracle(const Frame& a, const Frame& b) {
    long double se = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const long double d = (long double)a.pixels[i] - b.pixels[i];
        se += d * d;
    }
    const long double mse = se / a.pixels.size();
    return double(10 * std::log10(255.0L * 255.0L / mse));
}

// Direct per-window evaluation without integral images.
double ssim_oracle(const Frame& a, const Frame& b) {
    auto luma = [](const Frame& f, std::uint32_t x, std::uint32_t y) {
        double s = 0;
        for (std::uint32_t c = 0; c < f.channels; ++c) s += f.at(x, y, c);
        return s / f.channels;
    };
    const double c1 = 2.55 * 2.55, c2 = 7.65 * 7.65;
    double total = 0;
    int count = 0;
    for (std::uint32_t y = 0; y + 8 <= a.height; ++y)
        for (std::uint32_t x = 0; x + 8 <= a.width; ++x) {
            double ma = 0, mb = 0;
            for (std::uint32_t j = 0; j < 8; ++j)
                for (std::uint32_t i = 0; i < 8; ++i) {
                    ma += luma(a, x + i, y + j);
                    mb += luma(b, x + i, y + j);
                }
            ma /= 64;
            mb /= 64;
            double va = 0, vb = 0, cov = 0;
            for (std::uint32_t j = 0; j < 8; ++j)
                for (std::uint32_t i = 0; i < 8; ++i) {
                    const double da = luma(a, x + i, y + j) - ma, db = luma(b, x + i, y + j) - mb;
                    va += da * da;
                    vb += db * db;
                    cov += da * db;
                }
            va /= 64;
            vb /= 64;
            cov /= 64;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / count;
}

TrajectoryLog static_log(std::size_t n, double yaw = 0, double pitch = 0) {
    TrajectoryLog log;
    for (std::size_t i = 0; i < n; ++i) log.samples.push_back({i * 1000.0 / 30, yaw, pitch, 0, 0.5, 0.5});
    return log;
}

struct EncodedClip {
    test::TempDir dir;
    std::vector<Frame> frames;
    std::filesystem::path path;
    EncodedClip(EncodeParams p, ClipStyle style = ClipStyle::Detailed, std::uint32_t w = 256, std::uint32_t h = 128,
                std::uint32_t n = 8) {
        frames = synthetic_clip(w, h, n, 5, style);
        path = dir / "clip.wvv";
        write_video(encode_video(frames, p), path);
    }
};

EncodeParams params(double alpha = 0.1) {
    EncodeParams p;
    p.alpha = alpha;
    p.levels = 4;
    p.block_size = 16;
    return p;
}

}  // namespace

TEST_CASE("psnr of identical images is capped") {
    const Frame a = noise(16, 8, 1);
    CHECK(psnr(a, a) == kPsnrCap);
}

TEST_CASE("psnr with a uniform offset of 16 is about 24.05 dB") {
    const Frame a = filled(32, 16, 100), b = filled(32, 16, 116);
    CHECK(std::abs(psnr(a, b) - 24.05) <= 0.01);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));
}

TEST_CASE("psnr matches an independent oracle") {
    for (std::uint32_t seed = 1; seed <= 5; ++seed) {
        const Frame a = noise(40, 24, seed), b = noise(40, 24, seed + 100);
        CHECK(std::abs(psnr(a, b) - psnr_oracle(a, b)) < 1e-6);
    }
}

TEST_CASE("psnr region restricts the comparison") {
    Frame a = filled(8, 8, 50), b = filled(8, 8, 50);
    for (std::uint32_t y = 0; y < 8; ++y) b.at(7, y, 0) = 0;
    BitGrid left(8, 8, 1);
    for (std::uint32_t y = 0; y < 8; ++y) left(7, y) = 0;
    CHECK(psnr(a, b, &left) == kPsnrCap);
    CHECK(psnr(a, b) < kPsnrCap);
    BitGrid none(8, 8, 0);
    CHECK_THROWS_AS(psnr(a, b, &none), DimensionError);
    BitGrid wrong(4, 4, 1);
    CHECK_THROWS_AS(psnr(a, b, &wrong), DimensionError);
}

TEST_CASE("metrics reject mismatched images") {
    CHECK_THROWS_AS(psnr(filled(8, 8, 0), filled(8, 4, 0)), DimensionError);
    CHECK_THROWS_AS(psnr(filled(8, 8, 0, 3), filled(8, 8, 0, 1)), DimensionError);
    CHECK_THROWS_AS(ssim(filled(8, 8, 0), filled(9, 8, 0)), DimensionError);
}

TEST_CASE("ssim of identical images is one") {
    const Frame a = noise(32, 20, 7);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    const Frame flat = filled(16, 16, 0);
    CHECK(ssim(flat, flat) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim between two flat images follows the luminance term") {
    const double a = 100, b = 132, c1 = 2.55 * 2.55;
    const double expected = (2 * a * b + c1) / (a * a + b * b + c1);
    CHECK(ssim(filled(16, 16, 100), filled(16, 16, 132)) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("ssim matches a direct windowed oracle") {
    for (std::uint32_t seed = 1; seed <= 3; ++seed) {
        Frame a = noise(24, 16, seed);
        Frame b = a;
        std::mt19937 rng(seed);
        std::uniform_int_distribution<int> d(-20, 20);
        for (auto& v : b.pixels) v = std::uint8_t(std::clamp(int(v) + d(rng), 0, 255));
        CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) < 1e-4);
        CHECK(ssim(a, b) < 1.0);
    }
}

TEST_CASE("trajectory csv round trip and lookup") {
    std::istringstream in("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n0,10,5,0,0.5,0.5\n\n33.3,20,-5,1,0.4,0.6\n66.6,30,0,0,1,0\n");
    const TrajectoryLog log = TrajectoryLog::parse(in);
    REQUIRE(log.samples.size() == 3);
    CHECK(log.samples[1].yaw == 20);
    CHECK(log.samples[1].gaze_v == doctest::Approx(0.6));
    CHECK(log.at(-5).yaw == 10);
    CHECK(log.at(0).yaw == 10);
    CHECK(log.at(40).yaw == 20);
    CHECK(log.at(1e9).yaw == 30);

    std::ostringstream out;
    log.write(out);
    std::istringstream again(out.str());
    const TrajectoryLog copy = TrajectoryLog::parse(again);
    REQUIRE(copy.samples.size() == 3);
    CHECK(copy.samples[2].t_ms == doctest::Approx(66.6));
}

TEST_CASE("trajectory parse errors") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return TrajectoryLog::parse(in);
    };
    CHECK_THROWS_AS(parse(""), DataError);
    CHECK_THROWS_AS(parse("time,yaw\n0,0\n"), DataError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n0,abc,0,0,0.5,0.5\n"), DataError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n0,0,0,0,0.5\n"), DataError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n"), RangeError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n5,0,0,0,0.5,0.5\n5,0,0,0,0.5,0.5\n"), RangeError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n0,0,95,0,0.5,0.5\n"), RangeError);
    CHECK_THROWS_AS(parse("t_ms,yaw,pitch,roll,gaze_u,gaze_v\n0,0,0,0,1.5,0.5\n"), RangeError);
    CHECK_THROWS_AS(TrajectoryLog::load("/nonexistent/trajectory.csv"), Error);
}

TEST_CASE("replay mode names") {
    for (auto m : {ReplayMode::Full, ReplayMode::Viewport, ReplayMode::Foveated})
        CHECK(parse_replay_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_replay_mode("fast"), RangeError);
}

TEST_CASE("replay byte ordering across modes") {
    EncodedClip clip(params());
    const TrajectoryLog log = static_log(8, 30, -20);
    ReplayOptions o;
    o.runs = 1;
    o.mode = ReplayMode::Full;
    const BenchReport full = replay(clip.path, log, o, clip.frames);
    o.mode = ReplayMode::Viewport;
    const BenchReport view = replay(clip.path, log, o, clip.frames);
    o.mode = ReplayMode::Foveated;
    const BenchReport fov = replay(clip.path, log, o, clip.frames);

    REQUIRE(full.frames.size() == 8);
    for (std::size_t f = 0; f < 8; ++f) {
        CHECK(view.frames[f].bytes <= full.frames[f].bytes);
        CHECK(fov.frames[f].bytes <= view.frames[f].bytes);
    }
    CHECK(view.bytes_total < full.bytes_total);
    CHECK(fov.bytes_total < view.bytes_total);
    CHECK(full.psnr_mean.has_value());
    CHECK(*full.psnr_mean == doctest::Approx(*view.psnr_mean).epsilon(1e-9));
    CHECK(*full.psnr_mean > 30);
    CHECK(*full.ssim_mean > 0.9);
}

TEST_CASE("replay report fields") {
    EncodedClip clip(params());
    const TrajectoryLog log = static_log(8);
    ReplayOptions o;
    o.runs = 2;
    const BenchReport a = replay(clip.path, log, o, clip.frames);
    const BenchReport b = replay(clip.path, log, o, clip.frames);

    CHECK(a.runs == 2);
    CHECK(a.fps == doctest::Approx(1000.0 / a.mean_ms));
    CHECK(a.raw_bytes == 256ull * 128 * 3 * 8);
    CHECK(a.file_bytes == std::filesystem::file_size(clip.path));
    CHECK(a.compression_ratio == doctest::Approx(double(a.raw_bytes) / double(a.file_bytes)));
    CHECK(a.bytes_total == b.bytes_total);
    CHECK(a.records_total == b.records_total);
    for (std::size_t f = 0; f < a.frames.size(); ++f) {
        CHECK(a.frames[f].bytes == b.frames[f].bytes);
        CHECK(*a.frames[f].psnr == *b.frames[f].psnr);
        CHECK(*a.frames[f].ssim == *b.frames[f].ssim);
    }

    const std::string text = a.to_text();
    CHECK(text.find("mode=viewport\n") != std::string::npos);
    CHECK(text.find("bytes_total=" + std::to_string(a.bytes_total) + "\n") != std::string::npos);
    CHECK(text.find("frame.7.psnr=") != std::string::npos);
    const std::string json = a.to_json();
    CHECK(json.find("\"compression_ratio\"") != std::string::npos);

    const BenchReport bare = replay(clip.path, log, o);
    CHECK_FALSE(bare.psnr_mean.has_value());
    CHECK_FALSE(bare.frames[0].psnr.has_value());
}

TEST_CASE("replay errors") {
    EncodedClip clip(params());
    ReplayOptions o;
    o.runs = 0;
    CHECK_THROWS_AS(replay(clip.path, static_log(4), o), RangeError);
    o.runs = 1;
    CHECK_THROWS_AS(replay(clip.path, TrajectoryLog{}, o), RangeError);
    std::vector<Frame> few(clip.frames.begin(), clip.frames.begin() + 3);
    CHECK_THROWS_AS(replay(clip.path, static_log(4), o, few), DimensionError);
}

TEST_CASE("stronger thresholds trade quality for size") {
    EncodedClip hq(params(0.1), ClipStyle::Smooth), lq(params(0.25), ClipStyle::Smooth);
    ReplayOptions o;
    o.runs = 1;
    o.mode = ReplayMode::Full;
    const TrajectoryLog log = static_log(8);
    const BenchReport a = replay(hq.path, log, o, hq.frames), b = replay(lq.path, log, o, lq.frames);
    CHECK(*a.psnr_mean > *b.psnr_mean);
    CHECK(b.compression_ratio > a.compression_ratio);
}

TEST_CASE("synthetic clips are deterministic") {
    const auto a = synthetic_clip(64, 32, 3, 9, ClipStyle::Detailed);
    const auto b = synthetic_clip(64, 32, 3, 9, ClipStyle::Detailed);
    REQUIRE(a.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[i].pixels == b[i].pixels);
    CHECK(synthetic_clip(64, 32, 1, 10)[0].pixels != synthetic_clip(64, 32, 1, 9)[0].pixels);
    CHECK_THROWS_AS(synthetic_clip(0, 32, 1), DimensionError);
}
