// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wavevid/grid.hpp"

namespace wavevid {

enum class WaveletKind : std::uint8_t { Cdf97, Haar };

// Reach of one synthesis output sample into its interleaved inputs.
constexpr std::uint32_t synthesis_half_width(WaveletKind kind) {
    return kind == WaveletKind::Cdf97 ? 4 : 0;
}

// Multilevel 2D coefficients in Mallat layout: the approximation band sits in
// the top-left (width >> levels) x (height >> levels) corner; level k detail
// subbands occupy the three remaining quadrants of the (width >> (k-1)) square.
struct CoefficientPyramid {
    Plane plane;
    std::uint32_t levels = 0;

    std::uint32_t width() const { return plane.width; }
    std::uint32_t height() const { return plane.height; }
    friend bool operator==(const CoefficientPyramid&, const CoefficientPyramid&) = default;
};

// Subband naming follows the horizontal filter first: HL is high-pass along x
// and low-pass along y.
enum class Subband : std::uint8_t { LL, HL, LH, HH };

struct LevelPosition {
    std::uint32_t level;  // 1 = finest, levels = coarsest
    Subband subband;
    friend bool operator==(const LevelPosition&, const LevelPosition&) = default;
};

// Checks that a (width, height) grid can carry `levels` dyadic levels.
void check_pyramid_shape(std::uint32_t width, std::uint32_t height, std::uint32_t levels);

LevelPosition level_of_position(std::uint32_t x, std::uint32_t y, std::uint32_t levels,
                                std::uint32_t width, std::uint32_t height);

// 0 for the approximation band, 1 for the coarsest detail level and `levels`
// for the finest. Records inside a block are stored in this order.
std::uint32_t frequency_rank(std::uint32_t x, std::uint32_t y, std::uint32_t levels,
                             std::uint32_t width, std::uint32_t height);

std::pair<std::vector<float>, std::vector<float>> analyze_1d(std::span<const float> signal,
                                                             WaveletKind kind);
std::vector<float> synthesize_1d(std::span<const float> approx, std::span<const float> detail,
                                 WaveletKind kind);

CoefficientPyramid analyze_2d(const Plane& frame, std::uint32_t levels, WaveletKind kind);
Plane synthesize_2d(const CoefficientPyramid& pyramid, WaveletKind kind);

// Per-level masks driving a partial inverse transform. detail[k-1] has the
// resolution of one level-k subband and gates all three of its subbands;
// approx has the resolution of the approximation band.
struct LevelMaskSet {
    std::vector<BitGrid> detail;
    BitGrid approx;

    std::uint32_t levels() const { return std::uint32_t(detail.size()); }
    friend bool operator==(const LevelMaskSet&, const LevelMaskSet&) = default;
};

LevelMaskSet full_masks(std::uint32_t width, std::uint32_t height, std::uint32_t levels);

// Masks whose partial synthesis reproduces `target` (full resolution) exactly:
// each level is the down-mapped finer level dilated by the synthesis half-width,
// and the approximation mask is the dilated coarsest detail mask.
LevelMaskSet close_dependencies(const BitGrid& target, std::uint32_t levels, WaveletKind kind);

// True if the coarse-to-fine dependency closure holds.
bool is_closed(const LevelMaskSet& masks, WaveletKind kind);

BitGrid dilate_for_synthesis(const BitGrid& mask, WaveletKind kind);

struct RegionSynthesis {
    Plane pixels;        // zero outside `computed`
    BitGrid footprint;   // bit-identical to a full inverse of the same pyramid
    BitGrid computed;    // every pixel the partial inverse produced
};

// Inverse transform restricted to what the masks demand. Detail coefficients
// outside their level mask and approximation coefficients outside the
// approximation mask are treated as zero. With a full-resolution `target`,
// each level only computes the dependency closure of that target.
RegionSynthesis synthesize_2d_region(const CoefficientPyramid& pyramid, const LevelMaskSet& masks,
                                     WaveletKind kind, const BitGrid* target = nullptr);

}  // namespace wavevid
