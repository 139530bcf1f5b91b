// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wavevid/bitstream.hpp"
#include "wavevid/coefficients.hpp"
#include "wavevid/frame.hpp"
#include "wavevid/layout.hpp"
#include "wavevid/wavelet.hpp"

namespace wavevid {

enum class Mapping : std::uint8_t { None, Equirectangular };

struct EncodeParams {
    double alpha = 0.1;              // frame-wise threshold constant
    double inter_threshold = 0.005;  // temporal threshold constant
    std::optional<std::uint32_t> levels;  // unset: derived from the frame width
    std::uint32_t inter_size = 4;    // frames per inter-frame set, power of two
    std::uint32_t block_size = 32;
    Mapping mapping = Mapping::None;
    bool quantize = true;            // false stores raw floats (lossless debugging)
    bool stereo = false;             // top-bottom stereo frames
    float fps = 30.0f;
    std::optional<std::uint32_t> mask_width;
    std::optional<std::uint32_t> mask_height;
    unsigned threads = 0;            // 0: WAVEVID_THREADS or hardware concurrency
};

// log2(width / 32) - 2 clamped to [1, log2(min(width, height))].
std::uint32_t default_levels(std::uint32_t width, std::uint32_t height);

// Viewport mask resolution: at most 256 cells per axis, eight pixels per cell
// for smaller frames.
std::uint32_t default_mask_extent(std::uint32_t pixels);

// One frame's coefficients, one pyramid per channel.
using FramePyramids = std::vector<CoefficientPyramid>;

struct InterFrameSet {
    // frames[t'][channel]; t' = 0 is the temporal approximation, level-k
    // temporal details occupy [n >> k, n >> (k - 1)).
    std::vector<FramePyramids> frames;
    std::vector<BandExtrema> extrema;  // [t' * channels + channel]

    std::uint32_t size() const { return std::uint32_t(frames.size()); }
    std::uint32_t channels() const { return frames.empty() ? 0 : std::uint32_t(frames[0].size()); }
    const BandExtrema& band(std::uint32_t t, std::uint32_t channel) const {
        return extrema[std::size_t(t) * channels() + channel];
    }
};

// Threshold for level l (0 = finest detail) of l_max levels.
double threshold_value(double alpha, std::uint32_t level, std::uint32_t max_level, double mapping);

// Per-row H values for the frame height (all zero for Mapping::None). Stereo
// frames get one profile per eye.
std::vector<double> mapping_factors(std::uint32_t height, Mapping mapping, bool stereo);

// Zeroes detail positions whose largest channel magnitude is not above the
// level threshold. The approximation band is left alone.
void sparsify(FramePyramids& frame, double alpha, std::span<const double> mapping_factors);

InterFrameSet temporal_forward(std::span<const FramePyramids> pyramids);
void temporal_inverse_dense(InterFrameSet& set);

// Recomputes extrema from the current coefficients.
void compute_extrema(InterFrameSet& set);

void temporal_threshold(InterFrameSet& set, double inter_threshold);

std::uint8_t quantize_value(float c, float lo, float hi);
float dequantize_value(std::uint8_t q, float lo, float hi);

SparseCoefficients quantize(const InterFrameSet& set, const BlockLayout& layout, bool raw);

// BlockEnd pointers for sorted records: cumulative byte end of every
// (temporal frame, block) relative to the set's coefficient data.
std::vector<std::uint64_t> block_ends(const SparseCoefficients& records, const BlockLayout& layout,
                                      std::uint32_t inter_size);

// Encodes frames (padding the last set by repeating the final frame).
EncodedVideo encode_video(std::span<const Frame> frames, const EncodeParams& params);

// Encodes one inter-frame set worth of frames.
EncodedSet encode_set(std::span<const Frame> frames, const BlockLayout& layout,
                      const EncodeParams& params, std::span<const double> mapping);

}  // namespace wavevid
