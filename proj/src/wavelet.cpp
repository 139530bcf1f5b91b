// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/wavelet.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <string>

#include "wavevid/error.hpp"

namespace wavevid {
namespace {

// CDF 9/7 lifting factorization (JPEG2000 irreversible path).
constexpr double kAlpha = -1.586134342059924;
constexpr double kBeta = -0.052980118572961;
constexpr double kGamma = 0.882911075530934;
constexpr double kDelta = 0.443506852043971;
constexpr double kScale = 1.230174104914001;

// One lifting step over the samples of parity `parity` held in buf, where
// buf[0] is global index `lo` of a length-n signal. Neighbours past the signal
// ends are mirrored (whole-sample symmetric); neighbours past the window ends
// are unknown, and those samples are left untouched.
void lift_step(std::span<double> buf, std::size_t lo, std::size_t n, std::size_t parity,
               double coeff) {
    const std::size_t hi = lo + buf.size();
    std::size_t first = lo + ((lo & 1) != parity);
    for (std::size_t i = first; i < hi; i += 2) {
        std::size_t left, right;
        if (i == 0)
            left = 1;
        else if (i - 1 < lo)
            continue;
        else
            left = i - 1;
        if (i + 1 == n)
            right = n - 2;
        else if (i + 1 >= hi)
            continue;
        else
            right = i + 1;
        buf[i - lo] += coeff * (buf[left - lo] + buf[right - lo]);
    }
}

void forward_lift(std::span<double> x, WaveletKind kind) {
    const std::size_t n = x.size();
    if (kind == WaveletKind::Haar) {
        for (std::size_t i = 0; i < n; i += 2) {
            const double a = x[i], b = x[i + 1];
            x[i] = (a + b) / 2;
            x[i + 1] = (a - b) / 2;
        }
        return;
    }
    lift_step(x, 0, n, 1, kAlpha);
    lift_step(x, 0, n, 0, kBeta);
    lift_step(x, 0, n, 1, kGamma);
    lift_step(x, 0, n, 0, kDelta);
    for (std::size_t i = 0; i < n; i += 2) {
        x[i] /= kScale;
        x[i + 1] *= kScale;
    }
}

// Inverse over the window buf = global [lo, lo + buf.size()); lo and the
// window length are even. Only samples farther than the synthesis half-width
// from an interior window edge come out exact.
void inverse_lift(std::span<double> buf, std::size_t lo, std::size_t n, WaveletKind kind) {
    if (kind == WaveletKind::Haar) {
        for (std::size_t i = 0; i < buf.size(); i += 2) {
            const double s = buf[i], d = buf[i + 1];
            buf[i] = s + d;
            buf[i + 1] = s - d;
        }
        return;
    }
    for (std::size_t i = 0; i < buf.size(); i += 2) {
        buf[i] *= kScale;
        buf[i + 1] /= kScale;
    }
    lift_step(buf, lo, n, 0, -kDelta);
    lift_step(buf, lo, n, 1, -kGamma);
    lift_step(buf, lo, n, 0, -kBeta);
    lift_step(buf, lo, n, 1, -kAlpha);
}

void check_signal(std::size_t n) {
    if (n < 2 || n % 2) throw LengthError("signal length must be even and at least 2, got " + std::to_string(n));
}

// Forward transform of one strided line of n samples; low half lands in the
// first n/2 slots, high half in the rest.
void analyze_line(float* line, std::size_t stride, std::size_t n, WaveletKind kind,
                  std::vector<double>& scratch) {
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = line[i * stride];
    forward_lift(scratch, kind);
    const std::size_t half = n / 2;
    for (std::size_t j = 0; j < half; ++j) {
        line[j * stride] = float(scratch[2 * j]);
        line[(half + j) * stride] = float(scratch[2 * j + 1]);
    }
}

std::pair<std::size_t, std::size_t> window_for(std::size_t a, std::size_t b, std::size_t n,
                                               std::size_t pad) {
    std::size_t lo = a > pad ? a - pad : 0;
    std::size_t hi = std::min(n, b + pad);
    lo &= ~std::size_t(1);
    hi += hi & 1;
    return {lo, hi};
}

// Fine cell x is valid when every coarse cell its synthesis reads is set in
// `coarse`. Reads of output x cover interleaved inputs [x - pad, x + pad].
BitGrid erode_to_fine(const BitGrid& coarse, std::uint32_t pad, std::uint32_t fw, std::uint32_t fh) {
    const std::uint32_t cw = coarse.width, ch = coarse.height;
    std::vector<std::uint32_t> sat(std::size_t(cw + 1) * (ch + 1), 0);
    auto at = [&](std::uint32_t x, std::uint32_t y) -> std::uint32_t& {
        return sat[std::size_t(y) * (cw + 1) + x];
    };
    for (std::uint32_t y = 0; y < ch; ++y)
        for (std::uint32_t x = 0; x < cw; ++x)
            at(x + 1, y + 1) = coarse(x, y) + at(x, y + 1) + at(x + 1, y) - at(x, y);

    auto span_of = [pad](std::uint32_t v, std::uint32_t n) {
        std::uint32_t a = v > pad ? (v - pad) >> 1 : 0;
        std::uint32_t b = std::min(n - 1, v + pad) >> 1;
        return std::pair{a, b};
    };
    BitGrid fine(fw, fh);
    for (std::uint32_t y = 0; y < fh; ++y) {
        auto [y0, y1] = span_of(y, fh);
        for (std::uint32_t x = 0; x < fw; ++x) {
            auto [x0, x1] = span_of(x, fw);
            const std::uint32_t sum = at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
            fine(x, y) = sum == (x1 - x0 + 1) * (y1 - y0 + 1);
        }
    }
    return fine;
}

// Rebuilds the level-(k-1) approximation on `region` from the level-k
// approximation and the gated level-k details.
Plane synthesize_level(const Plane& approx, const CoefficientPyramid& pyr, const BitGrid& gate,
                       const BitGrid& region, WaveletKind kind) {
    const std::uint32_t cw = approx.width, ch = approx.height;
    const std::uint32_t fw = cw * 2, fh = ch * 2;
    const std::uint32_t pad = synthesis_half_width(kind);
    const Plane& coeffs = pyr.plane;

    // Columns of the intermediate needed by the row pass, per row.
    BitGrid row_need(fw, fh);
    for (std::uint32_t y = 0; y < fh; ++y)
        for_each_run(region.row(y), fw, [&](std::uint32_t a, std::uint32_t b) {
            auto [lo, hi] = window_for(a, b, fw, pad);
            std::fill(row_need.row(y) + lo, row_need.row(y) + hi, std::uint8_t(1));
        });
    BitGrid half_need(cw, fh);
    for (std::uint32_t y = 0; y < fh; ++y) {
        const auto* src = row_need.row(y);
        auto* dst = half_need.row(y);
        for (std::uint32_t c = 0; c < cw; ++c) dst[c] = src[2 * c] | src[2 * c + 1];
    }

    Plane inter(fw, fh, 0.0f);
    std::vector<double> buf;
    std::vector<std::uint8_t> column(fh);
    for (std::uint32_t c = 0; c < cw; ++c) {
        for (std::uint32_t y = 0; y < fh; ++y) column[y] = half_need(c, y);
        for (int half = 0; half < 2; ++half) {
            // half 0: LL over LH; half 1: HL over HH.
            auto low = [&](std::uint32_t j) -> float {
                if (half == 0) return approx(c, j);
                return gate(c, j) ? coeffs(cw + c, j) : 0.0f;
            };
            auto high = [&](std::uint32_t j) -> float {
                if (!gate(c, j)) return 0.0f;
                return half == 0 ? coeffs(c, ch + j) : coeffs(cw + c, ch + j);
            };
            const std::uint32_t out_col = half == 0 ? c : cw + c;
            for_each_run(column.data(), fh, [&](std::uint32_t a, std::uint32_t b) {
                auto [lo, hi] = window_for(a, b, fh, pad);
                buf.resize(hi - lo);
                for (std::size_t r = lo; r < hi; r += 2) {
                    buf[r - lo] = low(std::uint32_t(r >> 1));
                    buf[r - lo + 1] = high(std::uint32_t(r >> 1));
                }
                inverse_lift(buf, lo, fh, kind);
                for (std::uint32_t r = a; r < b; ++r) inter(out_col, r) = float(buf[r - lo]);
            });
        }
    }

    Plane out(fw, fh, 0.0f);
    for (std::uint32_t y = 0; y < fh; ++y) {
        const float* src = inter.row(y);
        float* dst = out.row(y);
        for_each_run(region.row(y), fw, [&](std::uint32_t a, std::uint32_t b) {
            auto [lo, hi] = window_for(a, b, fw, pad);
            buf.resize(hi - lo);
            for (std::size_t i = lo; i < hi; i += 2) {
                buf[i - lo] = src[i >> 1];
                buf[i - lo + 1] = src[cw + (i >> 1)];
            }
            inverse_lift(buf, lo, fw, kind);
            for (std::uint32_t x = a; x < b; ++x) dst[x] = float(buf[x - lo]);
        });
    }
    return out;
}

}  // namespace

void check_pyramid_shape(std::uint32_t width, std::uint32_t height, std::uint32_t levels) {
    if (levels < 1 || levels > 31) throw DimensionError("level count must be at least 1");
    if (width == 0 || height == 0) throw DimensionError("empty frame");
    const std::uint32_t step = 1u << levels;
    if (width % step || height % step)
        throw DimensionError("frame " + std::to_string(width) + "x" + std::to_string(height) +
                             " not divisible by 2^" + std::to_string(levels));
}

LevelPosition level_of_position(std::uint32_t x, std::uint32_t y, std::uint32_t levels,
                                std::uint32_t width, std::uint32_t height) {
    if (x >= width || y >= height) throw RangeError("position outside the pyramid");
    for (std::uint32_t k = 1; k <= levels; ++k) {
        const std::uint32_t w = width >> k, h = height >> k;
        const bool hx = x >= w, hy = y >= h;
        if (hx || hy) return {k, hx ? (hy ? Subband::HH : Subband::HL) : Subband::LH};
    }
    return {levels, Subband::LL};
}

std::uint32_t frequency_rank(std::uint32_t x, std::uint32_t y, std::uint32_t levels,
                             std::uint32_t width, std::uint32_t height) {
    const auto pos = level_of_position(x, y, levels, width, height);
    if (pos.subband == Subband::LL) return 0;
    return levels + 1 - pos.level;
}

std::pair<std::vector<float>, std::vector<float>> analyze_1d(std::span<const float> signal,
                                                             WaveletKind kind) {
    check_signal(signal.size());
    std::vector<double> x(signal.begin(), signal.end());
    forward_lift(x, kind);
    const std::size_t half = x.size() / 2;
    std::vector<float> approx(half), detail(half);
    for (std::size_t j = 0; j < half; ++j) {
        approx[j] = float(x[2 * j]);
        detail[j] = float(x[2 * j + 1]);
    }
    return {std::move(approx), std::move(detail)};
}

std::vector<float> synthesize_1d(std::span<const float> approx, std::span<const float> detail,
                                 WaveletKind kind) {
    if (approx.size() != detail.size()) throw LengthError("approximation and detail lengths differ");
    if (approx.empty()) throw LengthError("empty coefficient sequences");
    const std::size_t n = approx.size() * 2;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < approx.size(); ++j) {
        x[2 * j] = approx[j];
        x[2 * j + 1] = detail[j];
    }
    inverse_lift(x, 0, n, kind);
    return std::vector<float>(x.begin(), x.end());
}

CoefficientPyramid analyze_2d(const Plane& frame, std::uint32_t levels, WaveletKind kind) {
    check_pyramid_shape(frame.width, frame.height, levels);
    CoefficientPyramid pyr{frame, levels};
    Plane& p = pyr.plane;
    std::vector<double> scratch;
    for (std::uint32_t k = 0; k < levels; ++k) {
        const std::uint32_t w = frame.width >> k, h = frame.height >> k;
        for (std::uint32_t y = 0; y < h; ++y) analyze_line(p.row(y), 1, w, kind, scratch);
        for (std::uint32_t x = 0; x < w; ++x) analyze_line(p.data.data() + x, p.width, h, kind, scratch);
    }
    return pyr;
}

Plane synthesize_2d(const CoefficientPyramid& pyramid, WaveletKind kind) {
    return synthesize_2d_region(pyramid, full_masks(pyramid.width(), pyramid.height(), pyramid.levels), kind)
        .pixels;
}

LevelMaskSet full_masks(std::uint32_t width, std::uint32_t height, std::uint32_t levels) {
    check_pyramid_shape(width, height, levels);
    LevelMaskSet m;
    for (std::uint32_t k = 1; k <= levels; ++k) m.detail.emplace_back(width >> k, height >> k, 1);
    m.approx = BitGrid(width >> levels, height >> levels, 1);
    return m;
}

BitGrid dilate_for_synthesis(const BitGrid& mask, WaveletKind kind) {
    return dilate(mask, synthesis_half_width(kind));
}

LevelMaskSet close_dependencies(const BitGrid& target, std::uint32_t levels, WaveletKind kind) {
    check_pyramid_shape(target.width, target.height, levels);
    LevelMaskSet m;
    const BitGrid* finer = &target;
    for (std::uint32_t k = 1; k <= levels; ++k) {
        m.detail.push_back(dilate_for_synthesis(downmap(*finer), kind));
        finer = &m.detail.back();
    }
    m.approx = dilate_for_synthesis(m.detail.back(), kind);
    return m;
}

bool is_closed(const LevelMaskSet& masks, WaveletKind kind) {
    if (masks.detail.empty()) return false;
    for (std::size_t k = 1; k < masks.detail.size(); ++k) {
        const BitGrid need = dilate_for_synthesis(downmap(masks.detail[k - 1]), kind);
        if (!need.same_shape(masks.detail[k]) || !is_subset(need, masks.detail[k])) return false;
    }
    const BitGrid need = dilate_for_synthesis(masks.detail.back(), kind);
    return need.same_shape(masks.approx) && is_subset(need, masks.approx);
}

RegionSynthesis synthesize_2d_region(const CoefficientPyramid& pyramid, const LevelMaskSet& masks,
                                     WaveletKind kind, const BitGrid* target) {
    const std::uint32_t W = pyramid.width(), H = pyramid.height(), L = pyramid.levels;
    check_pyramid_shape(W, H, L);
    if (masks.levels() != L) throw DimensionError("mask set level count differs from pyramid");
    for (std::uint32_t k = 1; k <= L; ++k)
        if (masks.detail[k - 1].width != (W >> k) || masks.detail[k - 1].height != (H >> k))
            throw DimensionError("level " + std::to_string(k) + " mask has the wrong resolution");
    if (masks.approx.width != (W >> L) || masks.approx.height != (H >> L))
        throw DimensionError("approximation mask has the wrong resolution");
    if (target && (target->width != W || target->height != H))
        throw DimensionError("synthesis target has the wrong resolution");
    // Pixels outside the closure never feed the target, so skip them.
    std::optional<LevelMaskSet> reach;
    if (target) reach = close_dependencies(*target, L, kind);

    const std::uint32_t pad = synthesis_half_width(kind);
    Plane approx(W >> L, H >> L, 0.0f);
    for (std::uint32_t y = 0; y < approx.height; ++y)
        for (std::uint32_t x = 0; x < approx.width; ++x)
            if (masks.approx(x, y)) approx(x, y) = pyramid.plane(x, y);
    BitGrid valid = masks.approx;
    BitGrid exact = masks.approx;

    for (std::uint32_t k = L; k >= 1; --k) {
        const std::uint32_t fw = W >> (k - 1), fh = H >> (k - 1);
        const BitGrid& gate = masks.detail[k - 1];
        BitGrid region = erode_to_fine(valid, pad, fw, fh);
        if (reach) region = intersect(region, k == 1 ? *target : reach->detail[k - 2]);
        BitGrid next_exact = intersect(erode_to_fine(intersect(exact, gate), pad, fw, fh), region);
        approx = synthesize_level(approx, pyramid, gate, region, kind);
        valid = std::move(region);
        exact = std::move(next_exact);
    }
    return {std::move(approx), std::move(exact), std::move(valid)};
}

}  // namespace wavevid
