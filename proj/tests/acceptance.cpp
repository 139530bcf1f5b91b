// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance run on 512x512, 16-frame synthetic clips. Prints one
// PASS or FAIL line per criterion and exits non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "golden_cases.hpp"
#include "support.hpp"
#include "wavevid/bitstream.hpp"
#include "wavevid/decoder.hpp"
#include "wavevid/encoder.hpp"
#include "wavevid/projection.hpp"
#include "wavevid/quality.hpp"

using namespace wavevid;

namespace {

constexpr std::uint32_t kSide = 512, kFrames = 16;
const std::filesystem::path kGolden = std::filesystem::path(WAVEVID_TEST_DATA) / "golden";

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Outcome {
    bool ok = true;
    std::string detail;
};

EncodeParams base_params() {
    EncodeParams p;
    p.levels = 5;
    p.block_size = 16;
    return p;
}

const std::vector<Frame>& clip(ClipStyle style) {
    static std::map<ClipStyle, std::vector<Frame>> cache;
    auto it = cache.find(style);
    if (it == cache.end()) it = cache.emplace(style, synthetic_clip(kSide, kSide, kFrames, 1, style)).first;
    return it->second;
}

struct Encoded {
    std::filesystem::path path;
    std::shared_ptr<VideoFile> file;
};

Encoded encode_to(const test::TempDir& dir, const std::string& name, std::span<const Frame> frames,
                  const EncodeParams& p) {
    const auto path = dir / name;
    write_video(encode_video(frames, p), path);
    return {path, std::make_shared<VideoFile>(path)};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome lossless(const test::TempDir& dir, bool quantize) {
    EncodeParams p = base_params();
    p.alpha = 0;
    p.inter_threshold = 0;
    p.quantize = quantize;
    const auto& frames = clip(ClipStyle::Detailed);
    const Encoded e = encode_to(dir, quantize ? "q.wvv" : "raw.wvv", frames, p);
    DecodeSession s(e.file);
    int worst = 0;
    double lowest = kPsnrCap;
    for (std::uint32_t f = 0; f < kFrames; ++f) {
        const DecodeResult r = s.decode_full(f);
        for (std::size_t i = 0; i < r.pixels.pixels.size(); ++i)
            worst = std::max(worst, std::abs(int(r.pixels.pixels[i]) - int(frames[f].pixels[i])));
        lowest = std::min(lowest, psnr(r.pixels, frames[f]));
    }
    Outcome o;
    o.detail = "max_error=" + std::to_string(worst) + " min_psnr=" + fmt("%.2f", lowest);
    o.ok = quantize ? lowest >= 40 : (worst <= 1 && lowest >= 60);
    return o;
}

ViewportMask random_mask(std::mt19937& rng, const VideoHeader& h) {
    std::uniform_real_distribution<double> u(0, 1);
    switch (rng() % 3) {
        case 0: {  // camera viewport, sometimes very wide
            const CameraPose pose{u(rng) * 360 - 180, u(rng) * 170 - 85, u(rng) * 60 - 30, 30 + u(rng) * 150,
                                  30 + u(rng) * 120};
            return viewport_to_mask(pose, h.mask_width, h.mask_height);
        }
        case 1: {  // rectangle wrapping across the seam
            BitGrid g(h.mask_width, h.mask_height, 0);
            const std::uint32_t w = 1 + rng() % h.mask_width, ht = 1 + rng() % h.mask_height;
            const std::uint32_t x0 = rng() % h.mask_width, y0 = rng() % (h.mask_height - ht + 1);
            for (std::uint32_t y = y0; y < y0 + ht; ++y)
                for (std::uint32_t x = 0; x < w; ++x) g((x0 + x) % h.mask_width, y) = 1;
            return {g};
        }
        default:  // scattered cells
            return {test::random_mask(h.mask_width, h.mask_height, 0.002 + 0.05 * u(rng), std::uint32_t(rng()))};
    }
}

Outcome roi_exactness(const test::TempDir& dir) {
    const auto& frames = clip(ClipStyle::Detailed);
    const Encoded e = encode_to(dir, "roi.wvv", frames, base_params());
    const VideoHeader& h = e.file->header();
    std::vector<Frame> full;
    DecodeSession fs(e.file);
    for (std::uint32_t f = 0; f < kFrames; ++f) full.push_back(fs.decode_full(f).pixels);

    std::mt19937 rng(2024);
    std::size_t mismatched = 0, uncovered = 0, checked = 0;
    for (int i = 0; i < 100; ++i) {
        const std::uint32_t f = rng() % kFrames;
        const ViewportMask mask = random_mask(rng, h);
        DecodeSession s(e.file);
        const DecodeResult r = s.decode_viewport(f, mask);
        const BitGrid target = mask_target(mask, h.width, h.height);
        for (std::uint32_t y = 0; y < h.height; ++y)
            for (std::uint32_t x = 0; x < h.width; ++x) {
                if (target(x, y) && !r.footprint(x, y)) ++uncovered;
                if (!r.footprint(x, y)) continue;
                ++checked;
                for (std::uint32_t c = 0; c < h.channels; ++c) mismatched += r.pixels.at(x, y, c) != full[f].at(x, y, c);
            }
    }
    return {mismatched == 0 && uncovered == 0 && checked > 0,
            "footprint_pixels=" + std::to_string(checked) + " mismatched=" + std::to_string(mismatched) +
                " target_outside_footprint=" + std::to_string(uncovered)};
}

Outcome temporal_oracle() {
    const auto& frames = clip(ClipStyle::Detailed);
    std::size_t compared = 0, differing = 0;
    for (std::uint32_t n : {1u, 2u, 4u, 8u}) {
        EncodeParams p = base_params();
        p.inter_size = n;
        const EncodedVideo v = encode_video(frames, p);
        const BlockLayout layout = v.header.layout();
        for (const auto& s : v.sets) {
            InterFrameSet dense = densify(s.records, s.extrema, layout, n);
            temporal_inverse_dense(dense);
            for (std::uint32_t t = 0; t < n; ++t) {
                const auto sparse = temporal_inverse_sparse(s.records, s.extrema, layout, n, t);
                for (std::uint32_t c = 0; c < v.header.channels; ++c) {
                    const auto& a = sparse[c].plane.data;
                    const auto& b = dense.frames[t][c].plane.data;
                    // Every position, record or not.
                    for (std::size_t i = 0; i < a.size(); ++i) differing += a[i] != b[i];
                    compared += a.size();
                }
            }
        }
    }
    return {differing == 0 && compared > 0,
            "positions=" + std::to_string(compared) + " differing=" + std::to_string(differing)};
}

Outcome keyframe_freedom(const test::TempDir& dir) {
    const Encoded e = encode_to(dir, "seek.wvv", clip(ClipStyle::Detailed), base_params());
    const VideoHeader& h = e.file->header();
    std::mutex m;
    std::vector<IoEvent> events;
    e.file->set_io_observer([&](const IoEvent& ev) {
        std::lock_guard lock(m);
        events.push_back(ev);
    });
    auto set_of = [&](const IoEvent& ev) -> int {
        for (std::uint32_t s = 0; s < h.set_count(); ++s) {
            const SetMeta& meta = e.file->set(s);
            if (ev.offset >= meta.payload_offset && ev.offset + ev.length <= meta.payload_offset + meta.payload_length)
                return int(s);
        }
        return -1;
    };
    std::mt19937 rng(77);
    const CameraPose pose{35, -10, 0, 90, 90};
    const ViewportMask mask = viewport_to_mask(pose, h.mask_width, h.mask_height);
    int bad = 0;
    for (int i = 0; i < 40; ++i) {
        const std::uint32_t f = rng() % kFrames;
        events.clear();
        DecodeSession s(e.file);
        if (i % 2) s.decode_full(f);
        else s.decode_viewport(f, mask);
        std::set<int> touched;
        for (const auto& ev : events) touched.insert(set_of(ev));
        if (touched != std::set<int>{int(f / h.inter_size())}) ++bad;
    }
    return {bad == 0, "seeks=40 touching_other_sets=" + std::to_string(bad)};
}

struct Summary {
    double psnr = 0, ratio = 0;
};

Summary full_quality(const test::TempDir& dir, const std::string& name, double alpha) {
    EncodeParams p = base_params();
    p.alpha = alpha;
    const auto& frames = clip(ClipStyle::Smooth);
    const Encoded e = encode_to(dir, name, frames, p);
    DecodeSession s(e.file);
    Summary out;
    for (std::uint32_t f = 0; f < kFrames; ++f) out.psnr += psnr(s.decode_full(f).pixels, frames[f]) / kFrames;
    out.ratio = double(kSide) * kSide * 3 * kFrames / double(e.file->file_size());
    return out;
}

Outcome quality_ordering(const test::TempDir& dir) {
    const Summary hq = full_quality(dir, "hq.wvv", 0.1), lq = full_quality(dir, "lq.wvv", 0.25);
    return {hq.psnr > lq.psnr && lq.ratio > hq.ratio,
            "hq_psnr=" + fmt("%.2f", hq.psnr) + " lq_psnr=" + fmt("%.2f", lq.psnr) + " hq_ratio=" +
                fmt("%.1f", hq.ratio) + " lq_ratio=" + fmt("%.1f", lq.ratio)};
}

Outcome compression_magnitude(const test::TempDir& dir) {
    const Summary hq = full_quality(dir, "mag.wvv", 0.1);
    return {hq.ratio >= 20, "ratio=" + fmt("%.1f", hq.ratio) + " psnr=" + fmt("%.2f", hq.psnr)};
}

Outcome foveation(const test::TempDir& dir) {
    const Encoded e = encode_to(dir, "fov.wvv", clip(ClipStyle::Detailed), base_params());
    const VideoHeader& h = e.file->header();
    const FoveationSchedule schedule = FoveationSchedule::standard(h.levels);
    std::uint64_t viewport = 0, foveated = 0;
    for (const auto& [yaw, pitch] : std::vector<std::pair<double, double>>{{0, 0}, {90, 20}, {-120, -30}, {180, 0}}) {
        const ViewportMask mask = viewport_to_mask({yaw, pitch, 0, 90, 90}, h.mask_width, h.mask_height);
        DecodeSession a(e.file), b(e.file);
        for (std::uint32_t f = 0; f < kFrames; ++f) {
            viewport += a.decode_viewport(f, mask).stats.bytes_loaded;
            foveated += b.decode_foveated(f, mask, schedule).stats.bytes_loaded;
        }
    }
    const double saving = 1.0 - double(foveated) / double(viewport);
    return {saving >= 0.5, "viewport_bytes=" + std::to_string(viewport) + " foveated_bytes=" +
                               std::to_string(foveated) + " saving=" + fmt("%.3f", saving)};
}

Outcome cost_monotonicity(const test::TempDir& dir) {
    const Encoded e = encode_to(dir, "cost.wvv", clip(ClipStyle::Detailed), base_params());
    const VideoHeader& h = e.file->header();
    std::vector<ViewportMask> masks;
    for (double share : {0.25, 0.5, 1.0}) {
        BitGrid g(h.mask_width, h.mask_height, 0);
        const auto cols = std::uint32_t(std::lround(share * h.mask_width));
        for (std::uint32_t y = 0; y < h.mask_height; ++y)
            for (std::uint32_t x = 0; x < cols; ++x) g(x, y) = 1;
        masks.push_back({g});
    }
    constexpr int kRuns = 20;
    std::vector<std::vector<double>> times(3);
    std::vector<std::vector<std::uint64_t>> bytes(3);
    for (int run = -1; run < kRuns; ++run)  // run -1 warms caches
        for (std::size_t m = 0; m < 3; ++m) {
            DecodeSession s(e.file);
            const auto start = Clock::now();
            const DecodeResult r = s.decode_viewport(5, masks[m]);
            const double t = ms_since(start);
            if (run < 0) continue;
            times[m].push_back(t);
            bytes[m].push_back(r.stats.bytes_loaded);
        }
    auto median = [](auto v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    double mt[3];
    std::uint64_t mb[3];
    for (int m = 0; m < 3; ++m) {
        mt[m] = median(times[std::size_t(m)]);
        mb[m] = median(bytes[std::size_t(m)]);
    }
    std::ostringstream d;
    d << "median_ms=" << fmt("%.1f", mt[0]) << "/" << fmt("%.1f", mt[1]) << "/" << fmt("%.1f", mt[2])
      << " median_bytes=" << mb[0] << "/" << mb[1] << "/" << mb[2];
    return {mt[0] <= mt[1] && mt[1] <= mt[2] && mb[0] <= mb[1] && mb[1] <= mb[2], d.str()};
}

Outcome golden_files() {
    int bad = 0, count = 0;
    for (const auto& c : test::golden_cases()) {
        ++count;
        const auto path = kGolden / (c.name + ".wvv");
        const VideoFile file(path);
        std::vector<std::vector<std::uint64_t>> ends;
        std::vector<SparseCoefficients> records;
        for (std::uint32_t s = 0; s < file.header().set_count(); ++s) {
            ends.push_back(file.read_block_ends(s));
            records.push_back(file.read_set(s));
        }
        std::ifstream js(kGolden / (c.name + ".json"));
        const bool fields = test::describe(file.header(), file.sets(), ends, records) == nlohmann::json::parse(js);
        std::ostringstream fresh;
        const EncodedVideo v = encode_video(c.frames, c.params);
        write_video(v.header, v.sets, fresh);
        std::ifstream in(path, std::ios::binary);
        const std::string frozen{std::istreambuf_iterator<char>(in), {}};
        if (!fields || fresh.str() != frozen) ++bad;
    }
    return {bad == 0 && count == 3, "files=" + std::to_string(count) + " drifted=" + std::to_string(bad)};
}

Outcome metric_self_test() {
    Frame a(64, 64, 3), b(64, 64, 3);
    std::fill(a.pixels.begin(), a.pixels.end(), std::uint8_t(100));
    std::fill(b.pixels.begin(), b.pixels.end(), std::uint8_t(116));
    const double p = psnr(a, b);
    const Frame& img = clip(ClipStyle::Detailed)[0];
    const double s = ssim(img, img);
    return {std::abs(p - 24.05) <= 0.01 && s == 1.0, "psnr=" + fmt("%.4f", p) + " ssim_identical=" + fmt("%.6f", s)};
}

struct Criterion {
    const char* name;
    double limit_ms;  // 0: no limit
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    test::TempDir dir;
    clip(ClipStyle::Smooth);
    clip(ClipStyle::Detailed);

    const std::vector<Criterion> criteria = {
        {"lossless_path", 10e3, [&] { return lossless(dir, false); }},
        {"quantized_near_lossless", 10e3, [&] { return lossless(dir, true); }},
        {"roi_exactness", 60e3, [&] { return roi_exactness(dir); }},
        {"temporal_oracle", 10e3, [] { return temporal_oracle(); }},
        {"keyframe_freedom", 0, [&] { return keyframe_freedom(dir); }},
        {"quality_ordering", 0, [&] { return quality_ordering(dir); }},
        {"compression_magnitude", 0, [&] { return compression_magnitude(dir); }},
        {"foveation_savings", 0, [&] { return foveation(dir); }},
        {"cost_monotonicity", 0, [&] { return cost_monotonicity(dir); }},
        {"format_golden_files", 0, [] { return golden_files(); }},
        {"metric_self_test", 0, [] { return metric_self_test(); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double ms = ms_since(start);
        if (c.limit_ms > 0 && ms >= c.limit_ms) {
            o.ok = false;
            o.detail += " over_time_limit";
        }
        failed += !o.ok;
        std::printf("%s %s (%.0f ms) %s\n", o.ok ? "PASS" : "FAIL", c.name, ms, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed ? 1 : 0;
}
