// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "wavevid/error.hpp"
#include "wavevid/parallel.hpp"
#include "wavevid/projection.hpp"

namespace wavevid {

void SparseCoefficients::append(const SparseCoefficients& other, std::size_t index) {
    keys.push_back(other.keys[index]);
    const std::size_t base = index * channels;
    if (raw)
        values.insert(values.end(), other.values.begin() + base, other.values.begin() + base + channels);
    else
        quantized.insert(quantized.end(), other.quantized.begin() + base,
                         other.quantized.begin() + base + channels);
}

std::uint32_t default_levels(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) throw DimensionError("empty frame");
    const int by_width = int(std::floor(std::log2(width / 32.0))) - 2;
    const int max_levels = int(std::bit_width(std::min(width, height))) - 1;
    int levels = std::clamp(by_width, 1, std::max(1, max_levels));
    while (levels > 1 && ((width | height) & ((1u << levels) - 1))) --levels;
    return std::uint32_t(levels);
}

std::uint32_t default_mask_extent(std::uint32_t pixels) {
    std::uint32_t cells = std::clamp<std::uint32_t>(pixels / 8, 1, 256);
    while (pixels % cells) --cells;
    return cells;
}

double threshold_value(double alpha, std::uint32_t level, std::uint32_t max_level, double mapping) {
    if (max_level < 1) throw RangeError("threshold needs at least one level");
    if (level > max_level)
        throw RangeError("level " + std::to_string(level) + " exceeds " + std::to_string(max_level));
    const double w = double(max_level - level) / max_level;
    return alpha * w * w + mapping;
}

std::vector<double> mapping_factors(std::uint32_t height, Mapping mapping, bool stereo) {
    std::vector<double> h(height, 0.0);
    if (mapping == Mapping::None) return h;
    const std::uint32_t eye = stereo ? height / 2 : height;
    for (std::uint32_t y = 0; y < height; ++y) h[y] = mapping_factor(y % eye, eye);
    return h;
}

void sparsify(FramePyramids& frame, double alpha, std::span<const double> mapping) {
    if (frame.empty()) return;
    const std::uint32_t W = frame[0].width(), H = frame[0].height(), L = frame[0].levels;
    for (const auto& p : frame)
        if (p.width() != W || p.height() != H || p.levels != L)
            throw DimensionError("channel pyramids differ in shape");
    if (mapping.size() != H) throw DimensionError("one mapping factor per frame row required");

    for (std::uint32_t k = 1; k <= L; ++k) {
        const std::uint32_t cw = W >> k, ch = H >> k;
        const double base = threshold_value(alpha, k - 1, L, 0.0);
        for (std::uint32_t y = 0; y < 2 * ch; ++y) {
            const std::uint32_t j = y >= ch ? y - ch : y;
            const double t = base + mapping[(std::size_t(j) << k) + (1u << (k - 1))];
            // Columns [cw, 2cw) for every row; columns [0, cw) only below ch.
            const std::uint32_t x0 = y >= ch ? 0 : cw;
            for (std::uint32_t x = x0; x < 2 * cw; ++x) {
                float m = 0;
                for (const auto& p : frame) m = std::max(m, std::abs(p.plane(x, y)));
                if (!(m > t))
                    for (auto& p : frame) p.plane(x, y) = 0.0f;
            }
        }
    }
}

namespace {

std::uint32_t temporal_levels(std::uint32_t n) {
    if (n == 0 || !std::has_single_bit(n))
        throw RangeError("inter-frame set size must be a power of two, got " + std::to_string(n));
    return std::uint32_t(std::countr_zero(n));
}

void haar_forward(std::vector<float>& x, std::vector<float>& tmp) {
    for (std::size_t len = x.size(); len >= 2; len /= 2) {
        const std::size_t half = len / 2;
        for (std::size_t j = 0; j < half; ++j) {
            tmp[j] = (x[2 * j] + x[2 * j + 1]) / 2;
            tmp[half + j] = (x[2 * j] - x[2 * j + 1]) / 2;
        }
        std::copy_n(tmp.begin(), len, x.begin());
    }
}

void haar_inverse(std::vector<float>& x, std::vector<float>& tmp) {
    for (std::size_t len = 2; len <= x.size(); len *= 2) {
        const std::size_t half = len / 2;
        for (std::size_t j = 0; j < half; ++j) {
            tmp[2 * j] = x[j] + x[half + j];
            tmp[2 * j + 1] = x[j] - x[half + j];
        }
        std::copy_n(tmp.begin(), len, x.begin());
    }
}

template <typename Fn>
void along_time(InterFrameSet& set, Fn&& fn) {
    const std::uint32_t n = set.size();
    std::vector<float> x(n), tmp(n);
    for (std::uint32_t c = 0; c < set.channels(); ++c) {
        const std::size_t count = set.frames[0][c].plane.size();
        for (std::size_t i = 0; i < count; ++i) {
            for (std::uint32_t t = 0; t < n; ++t) x[t] = set.frames[t][c].plane.data[i];
            fn(x, tmp);
            for (std::uint32_t t = 0; t < n; ++t) set.frames[t][c].plane.data[i] = x[t];
        }
    }
}

}  // namespace

InterFrameSet temporal_forward(std::span<const FramePyramids> pyramids) {
    const std::uint32_t n = std::uint32_t(pyramids.size());
    temporal_levels(n);
    const FramePyramids& first = pyramids[0];
    if (first.empty()) throw DimensionError("frame without channels");
    for (const auto& f : pyramids) {
        if (f.size() != first.size()) throw DimensionError("channel count differs within set");
        for (std::size_t c = 0; c < f.size(); ++c)
            if (f[c].width() != first[c].width() || f[c].height() != first[c].height() ||
                f[c].levels != first[c].levels)
                throw DimensionError("pyramid shapes differ within set");
    }
    InterFrameSet set;
    set.frames.assign(pyramids.begin(), pyramids.end());
    if (n > 1) along_time(set, haar_forward);
    compute_extrema(set);
    return set;
}

void temporal_inverse_dense(InterFrameSet& set) {
    if (set.size() > 1) along_time(set, haar_inverse);
}

void compute_extrema(InterFrameSet& set) {
    const std::uint32_t n = set.size(), C = set.channels();
    set.extrema.assign(std::size_t(n) * C, {});
    for (std::uint32_t t = 0; t < n; ++t)
        for (std::uint32_t c = 0; c < C; ++c) {
            const auto& p = set.frames[t][c];
            const std::uint32_t aw = p.width() >> p.levels, ah = p.height() >> p.levels;
            float amin = INFINITY, amax = -INFINITY, dmin = INFINITY, dmax = -INFINITY;
            for (std::uint32_t y = 0; y < p.height(); ++y) {
                const float* row = p.plane.row(y);
                for (std::uint32_t x = 0; x < p.width(); ++x) {
                    const float v = row[x];
                    if (x < aw && y < ah) {
                        amin = std::min(amin, v);
                        amax = std::max(amax, v);
                    } else {
                        dmin = std::min(dmin, v);
                        dmax = std::max(dmax, v);
                    }
                }
            }
            set.extrema[std::size_t(t) * C + c] = {amin, amax, dmin, dmax};
        }
}

void temporal_threshold(InterFrameSet& set, double inter_threshold) {
    const std::uint32_t n = set.size();
    const std::uint32_t L = temporal_levels(n);
    if (L == 0) return;
    const std::uint32_t C = set.channels();
    for (std::uint32_t t = 1; t < n; ++t) {
        // t lies in the level-k detail block [n >> k, n >> (k-1)).
        const std::uint32_t k = L - std::uint32_t(std::bit_width(t)) + 1;
        const double T = threshold_value(inter_threshold, k - 1, L, 0.0);
        auto& frame = set.frames[t];
        const auto& p0 = frame[0];
        const std::uint32_t aw = p0.width() >> p0.levels, ah = p0.height() >> p0.levels;
        for (std::uint32_t y = 0; y < p0.height(); ++y)
            for (std::uint32_t x = y < ah ? aw : 0; x < p0.width(); ++x) {
                float m = 0;
                for (std::uint32_t c = 0; c < C; ++c) m = std::max(m, std::abs(frame[c].plane(x, y)));
                if (!(m > T))
                    for (std::uint32_t c = 0; c < C; ++c) frame[c].plane(x, y) = 0.0f;
            }
    }
    compute_extrema(set);
}

std::uint8_t quantize_value(float c, float lo, float hi) {
    if (!(hi > lo)) return 0;
    const double v = (double(c) - lo) / (double(hi) - lo) * 255.0;
    return std::uint8_t(std::clamp(std::round(v), 0.0, 255.0));
}

float dequantize_value(std::uint8_t q, float lo, float hi) {
    if (!(hi > lo)) return lo;
    return float(double(lo) + (double(hi) - lo) * q / 255.0);
}

SparseCoefficients quantize(const InterFrameSet& set, const BlockLayout& layout, bool raw) {
    const std::uint32_t n = set.size(), C = set.channels();
    SparseCoefficients out;
    out.channels = C;
    out.raw = raw;
    std::vector<std::vector<std::uint16_t>> orders(layout.block_count());
    for (std::uint32_t b = 0; b < layout.block_count(); ++b) orders[b] = layout.storage_order(b);

    for (std::uint32_t t = 0; t < n; ++t) {
        const auto& frame = set.frames[t];
        for (std::uint32_t b = 0; b < layout.block_count(); ++b)
            for (std::uint16_t off : orders[b]) {
                const auto pos = layout.position_of(b, off);
                bool any = false;
                for (std::uint32_t c = 0; c < C; ++c) any |= frame[c].plane(pos.x, pos.y) != 0.0f;
                if (!any) continue;
                out.keys.push_back({t, b, off});
                const bool approx = layout.in_approx_band(pos.x, pos.y);
                for (std::uint32_t c = 0; c < C; ++c) {
                    const float v = frame[c].plane(pos.x, pos.y);
                    if (raw) {
                        out.values.push_back(v);
                    } else {
                        const auto& e = set.band(t, c);
                        out.quantized.push_back(approx ? quantize_value(v, e.approx_min, e.approx_max)
                                                       : quantize_value(v, e.detail_min, e.detail_max));
                    }
                }
            }
    }
    return out;
}

std::vector<std::uint64_t> block_ends(const SparseCoefficients& records, const BlockLayout& layout,
                                      std::uint32_t inter_size) {
    const std::size_t B = layout.block_count();
    std::vector<std::uint64_t> ends(inter_size * B, 0);
    for (const auto& k : records.keys) {
        const std::size_t e = k.temporal * B + k.block;
        if (k.temporal >= inter_size || k.block >= B) throw RangeError("record outside the set");
        ends[e] += records.record_bytes();
    }
    for (std::size_t e = 1; e < ends.size(); ++e) ends[e] += ends[e - 1];
    return ends;
}

EncodedSet encode_set(std::span<const Frame> frames, const BlockLayout& layout,
                      const EncodeParams& params, std::span<const double> mapping) {
    std::vector<FramePyramids> pyramids;
    pyramids.reserve(frames.size());
    for (const Frame& f : frames) {
        FramePyramids per_channel;
        for (const Plane& p : to_planes(f))
            per_channel.push_back(analyze_2d(p, layout.levels, WaveletKind::Cdf97));
        sparsify(per_channel, params.alpha, mapping);
        pyramids.push_back(std::move(per_channel));
    }
    InterFrameSet set = temporal_forward(pyramids);
    temporal_threshold(set, params.inter_threshold);
    EncodedSet out;
    out.records = quantize(set, layout, !params.quantize);
    out.block_ends = block_ends(out.records, layout, set.size());
    out.extrema = std::move(set.extrema);
    return out;
}

EncodedVideo encode_video(std::span<const Frame> frames, const EncodeParams& params) {
    if (frames.empty()) throw Error("no frames to encode");
    const Frame& first = frames[0];
    for (const Frame& f : frames)
        if (!f.same_shape(first)) throw DimensionError("frames differ in shape");
    if (first.channels == 0 || first.channels > 255) throw DimensionError("unsupported channel count");
    if (params.alpha < 0 || params.inter_threshold < 0) throw RangeError("thresholds must be non-negative");
    const std::uint32_t n = params.inter_size;
    const std::uint32_t n_log2 = temporal_levels(n);
    if (n_log2 > 8) throw RangeError("inter-frame set too large");
    const std::uint32_t levels = params.levels.value_or(default_levels(first.width, first.height));
    const BlockLayout layout(first.width, first.height, levels, params.block_size);
    if (levels > 255) throw RangeError("too many levels");

    VideoHeader h;
    h.flags = std::uint16_t((params.stereo ? kFlagStereo : 0) | (params.quantize ? 0 : kFlagRawCoefficients) |
                            (params.mapping == Mapping::Equirectangular ? kFlagEquirectThreshold : 0));
    h.width = first.width;
    h.height = first.height;
    h.frame_count = std::uint32_t(frames.size());
    h.fps = params.fps;
    h.channels = std::uint8_t(first.channels);
    h.levels = std::uint8_t(levels);
    h.inter_size_log2 = std::uint8_t(n_log2);
    h.block_size_log2 = std::uint8_t(std::countr_zero(params.block_size));
    const std::uint32_t eye_h = params.stereo ? first.height / 2 : first.height;
    const std::uint32_t mw = params.mask_width.value_or(default_mask_extent(first.width));
    const std::uint32_t mh = params.mask_height.value_or(
        params.stereo ? 2 * default_mask_extent(eye_h) : default_mask_extent(first.height));
    if (mw > 65535 || mh > 65535) throw RangeError("mask too large");
    h.mask_width = std::uint16_t(mw);
    h.mask_height = std::uint16_t(mh);
    h.pad_frames = std::uint8_t((n - frames.size() % n) % n);
    validate(h);

    std::vector<Frame> padded(frames.begin(), frames.end());
    padded.resize(frames.size() + h.pad_frames, frames.back());
    const std::vector<double> mapping = mapping_factors(first.height, params.mapping, params.stereo);

    EncodedVideo video;
    video.header = h;
    video.sets.resize(h.set_count());
    parallel_for(video.sets.size(), worker_count(params.threads), [&](std::size_t s) {
        video.sets[s] = encode_set(std::span(padded).subspan(s * n, n), layout, params, mapping);
    });
    return video;
}

}  // namespace wavevid
