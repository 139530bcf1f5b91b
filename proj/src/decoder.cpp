// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/decoder.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <string>

#include "wavevid/error.hpp"
#include "wavevid/parallel.hpp"

namespace wavevid {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint32_t set_levels(std::uint32_t n) {
    if (n == 0 || !std::has_single_bit(n)) throw RangeError("inter-frame set size must be a power of two");
    return std::uint32_t(std::countr_zero(n));
}

void check_key(const RecordKey& k, const BlockLayout& layout, std::uint32_t n) {
    if (k.temporal >= n || k.block >= layout.block_count() || k.offset >= layout.block_size * layout.block_size)
        throw CorruptStream("record (" + std::to_string(k.temporal) + ", " + std::to_string(k.block) + ", " +
                            std::to_string(k.offset) + ") lies outside the set");
}

// Marks x in [x0, x0 + w) modulo width on rows [y0, y0 + h).
void fill_wrapped(BitGrid& g, std::int64_t x0, std::uint32_t w, std::uint32_t y0, std::uint32_t h) {
    const std::int64_t W = g.width;
    w = std::uint32_t(std::min<std::int64_t>(w, W));
    for (std::uint32_t y = y0; y < y0 + h && y < g.height; ++y)
        for (std::uint32_t i = 0; i < w; ++i) g(std::uint32_t((((x0 + i) % W) + W) % W), y) = 1;
}

// Per-level full-resolution windows intersected with the viewport target;
// windows[k - 1] belongs to level k. Unset entries mean "whole viewport".
std::vector<std::optional<BitGrid>> level_windows(const ViewportMask& viewport, const FoveationSchedule& s,
                                                  const VideoHeader& h, const BitGrid& target) {
    const std::uint32_t L = h.levels;
    s.validate(L);
    const WrappedRect box = viewport_bounds(viewport, h.width, h.height, h.stereo());
    const std::uint32_t eye_h = h.stereo() ? h.height / 2 : h.height;
    const double cx = box.x0 + s.gaze_u * box.w;
    const double cy = box.y0 + s.gaze_v * box.h;
    std::vector<std::optional<BitGrid>> out(L);
    for (std::uint32_t k = 1; k <= L; ++k) {
        const double f = s.fractions[L + 1 - k];
        if (f >= 1.0) continue;
        const auto ww = std::max<std::uint32_t>(1, std::uint32_t(std::lround(f * box.w)));
        const auto wh = std::max<std::uint32_t>(1, std::uint32_t(std::lround(f * box.h)));
        const auto x0 = std::int64_t(std::floor(cx - ww / 2.0));
        const auto y0 = std::uint32_t(std::clamp(std::floor(cy - wh / 2.0), 0.0, double(eye_h - std::min(wh, eye_h))));
        BitGrid win(h.width, h.height);
        fill_wrapped(win, x0, ww, y0, wh);
        if (h.stereo()) fill_wrapped(win, x0, ww, y0 + eye_h, wh);
        out[k - 1] = intersect(win, target);
    }
    return out;
}

}  // namespace

float record_value(const SparseCoefficients& records, std::size_t i, std::uint32_t c,
                   std::span<const BandExtrema> extrema, const BlockLayout& layout) {
    const std::uint32_t C = records.channels;
    if (records.raw) return records.values[i * C + c];
    const RecordKey& k = records.keys[i];
    const BandExtrema& e = extrema[std::size_t(k.temporal) * C + c];
    const auto pos = layout.position_of(k.block, k.offset);
    const std::uint8_t q = records.quantized[i * C + c];
    return layout.in_approx_band(pos.x, pos.y) ? dequantize_value(q, e.approx_min, e.approx_max)
                                               : dequantize_value(q, e.detail_min, e.detail_max);
}

FramePyramids temporal_inverse_sparse(const SparseCoefficients& records, std::span<const BandExtrema> extrema,
                                      const BlockLayout& layout, std::uint32_t n, std::uint32_t t,
                                      std::size_t* processed, const BitGrid* blocks) {
    const std::uint32_t L = set_levels(n);
    if (t >= n) throw RangeError("frame " + std::to_string(t) + " outside a set of " + std::to_string(n));
    const std::uint32_t C = records.channels;
    if (extrema.size() != std::size_t(n) * C) throw DimensionError("extrema table does not match the set");
    if (blocks && (blocks->width != layout.blocks_x() || blocks->height != layout.blocks_y()))
        throw DimensionError("block selection has the wrong shape");

    // Sign of each temporal coefficient in frame t; zero when it does not contribute.
    std::vector<int> sign(n, 0);
    sign[0] = 1;
    for (std::uint32_t k = L; k >= 1; --k) sign[(n >> k) + (t >> k)] = ((t >> (k - 1)) & 1) ? -1 : 1;

    FramePyramids out(C, CoefficientPyramid{Plane(layout.width, layout.height, 0.0f), layout.levels});
    std::size_t used = 0;
    // Records arrive ordered by temporal index, which adds the coarsest
    // temporal detail first, exactly like the dense inverse.
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RecordKey& k = records.keys[i];
        check_key(k, layout, n);
        const int s = sign[k.temporal];
        if (s == 0 || (blocks && !blocks->data[k.block])) continue;
        ++used;
        const auto pos = layout.position_of(k.block, k.offset);
        for (std::uint32_t c = 0; c < C; ++c) {
            const float v = record_value(records, i, c, extrema, layout);
            out[c].plane(pos.x, pos.y) += s > 0 ? v : -v;
        }
    }
    if (processed) *processed = used;
    return out;
}

InterFrameSet densify(const SparseCoefficients& records, std::span<const BandExtrema> extrema,
                      const BlockLayout& layout, std::uint32_t n) {
    set_levels(n);
    const std::uint32_t C = records.channels;
    if (extrema.size() != std::size_t(n) * C) throw DimensionError("extrema table does not match the set");
    InterFrameSet set;
    set.frames.assign(n, FramePyramids(C, CoefficientPyramid{Plane(layout.width, layout.height, 0.0f), layout.levels}));
    set.extrema.assign(extrema.begin(), extrema.end());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RecordKey& k = records.keys[i];
        check_key(k, layout, n);
        const auto pos = layout.position_of(k.block, k.offset);
        for (std::uint32_t c = 0; c < C; ++c)
            set.frames[k.temporal][c].plane(pos.x, pos.y) = record_value(records, i, c, extrema, layout);
    }
    return set;
}

FoveationSchedule FoveationSchedule::standard(std::uint32_t levels, double gaze_u, double gaze_v) {
    FoveationSchedule s;
    s.gaze_u = gaze_u;
    s.gaze_v = gaze_v;
    if (levels == 6) {
        s.fractions = {1.0, 0.65, 0.40, 0.22, 0.10, 0.04, 0.02};
    } else {
        for (std::uint32_t i = 0; i <= levels; ++i) s.fractions.push_back(std::pow(0.02, double(i) / levels));
        s.fractions.front() = 1.0;
    }
    return s;
}

void FoveationSchedule::validate(std::uint32_t levels) const {
    if (fractions.size() != levels + 1)
        throw RangeError("foveation schedule needs " + std::to_string(levels + 1) + " fractions, got " +
                         std::to_string(fractions.size()));
    if (fractions.front() != 1.0) throw RangeError("coarsest foveation fraction must be 1");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (!(fractions[i] > 0 && fractions[i] <= 1)) throw RangeError("foveation fractions must be in (0, 1]");
        if (i && fractions[i] > fractions[i - 1]) throw RangeError("foveation fractions must not increase");
    }
    if (!(gaze_u >= 0 && gaze_u <= 1 && gaze_v >= 0 && gaze_v <= 1)) throw RangeError("gaze must be in [0, 1]");
}

WrappedRect viewport_bounds(const ViewportMask& mask, std::uint32_t width, std::uint32_t height, bool stereo) {
    const BitGrid& m = mask.cells;
    const std::uint32_t mw = m.width, mh = stereo ? m.height / 2 : m.height;
    const std::uint32_t eye_h = stereo ? height / 2 : height;
    const std::uint32_t cw = width / mw, chh = eye_h / mh;
    std::vector<std::uint8_t> cols(mw, 0);
    std::uint32_t first_row = mh, last_row = 0;
    for (std::uint32_t y = 0; y < mh; ++y)
        for (std::uint32_t x = 0; x < mw; ++x)
            if (m(x, y)) {
                cols[x] = 1;
                first_row = std::min(first_row, y);
                last_row = std::max(last_row, y);
            }
    if (first_row == mh) return {0, 0, width, eye_h};

    // The box starts right after the longest circular run of empty columns.
    std::uint32_t best_len = 0, best_end = 0, run = 0;
    for (std::uint32_t i = 0; i < 2 * mw; ++i) {
        run = cols[i % mw] ? 0 : run + 1;
        if (run > best_len && run <= mw) {
            best_len = run;
            best_end = (i + 1) % mw;
        }
    }
    const std::uint32_t x0 = best_len == 0 ? 0 : best_end;
    return {x0 * cw, first_row * chh, (mw - best_len) * cw, (last_row - first_row + 1) * chh};
}

LevelMaskSet foveation_masks(const ViewportMask& viewport, const FoveationSchedule& schedule,
                             const VideoHeader& h) {
    const BitGrid target = mask_target(viewport, h.width, h.height);
    const auto windows = level_windows(viewport, schedule, h, target);
    LevelMaskSet full = close_dependencies(target, h.levels, WaveletKind::Cdf97);
    LevelMaskSet out;
    out.approx = full.approx;
    for (auto& d : full.detail) out.detail.emplace_back(d.width, d.height);
    // Level k keeps the dependency closures of every window j <= k, which is
    // itself closed because closure distributes over union.
    for (std::uint32_t j = 1; j <= h.levels; ++j) {
        const LevelMaskSet c = windows[j - 1] ? close_dependencies(*windows[j - 1], h.levels, WaveletKind::Cdf97) : full;
        for (std::uint32_t k = j; k <= h.levels; ++k) out.detail[k - 1] = unite(out.detail[k - 1], c.detail[k - 1]);
    }
    return out;
}

BitGrid fovea_target(const ViewportMask& viewport, const FoveationSchedule& schedule, const VideoHeader& h) {
    const BitGrid target = mask_target(viewport, h.width, h.height);
    auto windows = level_windows(viewport, schedule, h, target);
    return windows[0] ? std::move(*windows[0]) : target;
}

DecodeStats& DecodeStats::operator+=(const DecodeStats& o) {
    bytes_loaded += o.bytes_loaded;
    records += o.records;
    reads += o.reads;
    load_ms += o.load_ms;
    temporal_ms += o.temporal_ms;
    synthesis_ms += o.synthesis_ms;
    total_ms += o.total_ms;
    return *this;
}

DecodeSession::DecodeSession(std::shared_ptr<const VideoFile> file, unsigned threads)
    : file_(std::move(file)), threads_(worker_count(threads)) {
    if (!file_) throw Error("decode session needs an open file");
}

DecodeSession::DecodeSession(const std::filesystem::path& path, unsigned threads)
    : DecodeSession(std::make_shared<const VideoFile>(path), threads) {}

DecodeSession::~DecodeSession() {
    if (pending_ && pending_->result.valid()) pending_->result.wait();
}

std::optional<std::uint32_t> DecodeSession::resident_set() const {
    return current_ ? std::optional(current_->set) : std::nullopt;
}

std::optional<std::uint32_t> DecodeSession::pending_set() const {
    return pending_ ? std::optional(pending_->set) : std::nullopt;
}

LevelMaskSet DecodeSession::masks_for(const ViewportMask& mask, const FoveationSchedule* schedule) const {
    const VideoHeader& h = header();
    if (mask.cells.width != h.mask_width || mask.cells.height != h.mask_height)
        throw DimensionError("mask is " + std::to_string(mask.cells.width) + "x" + std::to_string(mask.cells.height) +
                             ", file expects " + std::to_string(h.mask_width) + "x" + std::to_string(h.mask_height));
    if (schedule) return foveation_masks(mask, *schedule, h);
    return close_dependencies(mask_target(mask, h.width, h.height), h.levels, WaveletKind::Cdf97);
}

DecodeSession::Loaded DecodeSession::load(std::uint32_t set, const BitGrid& blocks) const {
    Loaded l;
    l.set = set;
    l.blocks = blocks;
    LoadResult r = file_->load_blocks(set, blocks);
    l.records = std::move(r.records);
    l.bytes = r.total_bytes();
    l.reads = r.reads;
    return l;
}

void DecodeSession::ensure(std::uint32_t set, const BitGrid& blocks, DecodeStats& stats) {
    if (!current_ || current_->set != set) {
        current_.reset();
        if (pending_ && pending_->set == set) {
            current_ = pending_->result.get();
        } else {
            if (pending_) {
                // Prefetch guessed wrong; its IO still counts toward the session.
                Loaded wasted = pending_->result.get();
                totals_.bytes_loaded += wasted.bytes;
                totals_.reads += wasted.reads;
            }
            current_ = load(set, blocks);
        }
        pending_.reset();
    }
    Loaded& cur = *current_;
    BitGrid missing(blocks.width, blocks.height);
    bool any = false;
    for (std::size_t i = 0; i < blocks.size(); ++i)
        if (blocks.data[i] && !cur.blocks.data[i]) {
            missing.data[i] = 1;
            any = true;
        }
    if (any) {
        LoadResult r = file_->load_blocks(set, missing);
        // Merge the delta by (temporal index, block); blocks are disjoint.
        const std::uint32_t B = file_->header().layout().block_count();
        auto entry = [B](const RecordKey& k) { return std::uint64_t(k.temporal) * B + k.block; };
        SparseCoefficients merged;
        merged.channels = cur.records.channels;
        merged.raw = cur.records.raw;
        std::size_t i = 0, j = 0;
        while (i < cur.records.size() || j < r.records.size()) {
            const bool take_old = j == r.records.size() ||
                                  (i < cur.records.size() && entry(cur.records.keys[i]) < entry(r.records.keys[j]));
            if (take_old)
                merged.append(cur.records, i++);
            else
                merged.append(r.records, j++);
        }
        cur.records = std::move(merged);
        cur.blocks = unite(cur.blocks, missing);
        cur.bytes += r.total_bytes();
        cur.reads += r.reads;
    }
    stats.bytes_loaded += cur.bytes;
    stats.reads += cur.reads;
    cur.bytes = 0;
    cur.reads = 0;
}

DecodeResult DecodeSession::decode(std::uint32_t frame, const LevelMaskSet& masks, const BitGrid* target) {
    const auto start = Clock::now();
    const VideoHeader& h = header();
    if (frame >= h.frame_count)
        throw RangeError("frame " + std::to_string(frame) + " out of range (" + std::to_string(h.frame_count) +
                         " frames)");
    const std::uint32_t n = h.inter_size();
    const std::uint32_t set = frame / n, t = frame % n;
    const BlockLayout layout = h.layout();
    const BitGrid blocks = select_blocks(masks, layout);

    DecodeResult out;
    ensure(set, blocks, out.stats);
    last_set_ = set;
    out.stats.load_ms = ms_since(start);

    auto stage = Clock::now();
    std::size_t used = 0;
    FramePyramids pyramids =
        temporal_inverse_sparse(current_->records, file_->set(set).extrema, layout, n, t, &used, &blocks);
    out.stats.records = used;
    out.stats.temporal_ms = ms_since(stage);

    stage = Clock::now();
    std::vector<RegionSynthesis> parts(pyramids.size());
    parallel_for(pyramids.size(), threads_, [&](std::size_t c) {
        parts[c] = synthesize_2d_region(pyramids[c], masks, WaveletKind::Cdf97, target);
    });
    std::vector<Plane> planes;
    for (auto& p : parts) planes.push_back(std::move(p.pixels));
    out.footprint = std::move(parts[0].footprint);
    out.computed = std::move(parts[0].computed);
    out.pixels = from_planes(planes, &out.computed);
    out.stats.synthesis_ms = ms_since(stage);
    out.stats.total_ms = ms_since(start);
    totals_ += out.stats;
    return out;
}

DecodeResult DecodeSession::decode_viewport(std::uint32_t frame, const ViewportMask& mask) {
    const LevelMaskSet masks = masks_for(mask, nullptr);
    const BitGrid target = mask_target(mask, header().width, header().height);
    return decode(frame, masks, &target);
}

DecodeResult DecodeSession::decode_foveated(std::uint32_t frame, const ViewportMask& mask,
                                            const FoveationSchedule& schedule) {
    const LevelMaskSet masks = masks_for(mask, &schedule);
    const BitGrid target = mask_target(mask, header().width, header().height);
    return decode(frame, masks, &target);
}

DecodeResult DecodeSession::decode_full(std::uint32_t frame) {
    const VideoHeader& h = header();
    return decode(frame, full_masks(h.width, h.height, h.levels), nullptr);
}

bool DecodeSession::advance(const ViewportMask& next_mask, const std::optional<FoveationSchedule>& schedule) {
    const std::uint32_t next = last_set_ ? *last_set_ + 1 : 0;
    if (next >= header().set_count()) return false;
    if ((current_ && current_->set == next) || (pending_ && pending_->set == next)) return false;
    const BitGrid blocks = select_blocks(masks_for(next_mask, schedule ? &*schedule : nullptr), header().layout());
    if (pending_) {
        Loaded wasted = pending_->result.get();
        totals_.bytes_loaded += wasted.bytes;
        totals_.reads += wasted.reads;
        pending_.reset();
    }
    pending_ = Pending{next, std::async(std::launch::async, [this, next, blocks] { return load(next, blocks); })};
    return true;
}

}  // namespace wavevid
