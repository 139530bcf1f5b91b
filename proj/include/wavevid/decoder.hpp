// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wavevid/bitstream.hpp"
#include "wavevid/encoder.hpp"
#include "wavevid/frame.hpp"
#include "wavevid/wavelet.hpp"

namespace wavevid {

// Stored value of record `index`, channel `channel`, mapped back to its band range.
float record_value(const SparseCoefficients& records, std::size_t index, std::uint32_t channel,
                   std::span<const BandExtrema> extrema, const BlockLayout& layout);

// Spatial pyramids of frame t within a set, built only from the records:
// each position is its temporal approximation plus one signed detail per
// temporal level. Positions without records are zero. When `blocks` is given,
// records of unselected blocks are skipped. `processed` receives the number of
// records that contributed.
FramePyramids temporal_inverse_sparse(const SparseCoefficients& records, std::span<const BandExtrema> extrema,
                                      const BlockLayout& layout, std::uint32_t inter_size, std::uint32_t t,
                                      std::size_t* processed = nullptr, const BitGrid* blocks = nullptr);

// Dense dequantized inter-frame set (the reference the sparse path must match).
InterFrameSet densify(const SparseCoefficients& records, std::span<const BandExtrema> extrema,
                      const BlockLayout& layout, std::uint32_t inter_size);

// Retained window size per level as a fraction of the viewport extent.
// fractions[0] belongs to the approximation band, fractions[i] to detail level
// levels + 1 - i, so the last entry is the finest level. Gaze is relative to
// the viewport's bounding box on the frame.
struct FoveationSchedule {
    std::vector<double> fractions;
    double gaze_u = 0.5;
    double gaze_v = 0.5;

    // Six levels use a hand-tuned table; other counts decay geometrically from
    // 1 to 0.02.
    static FoveationSchedule standard(std::uint32_t levels, double gaze_u = 0.5, double gaze_v = 0.5);

    // Throws RangeError unless there are levels + 1 non-increasing fractions
    // in (0, 1], starting at 1, and the gaze lies in [0, 1]^2.
    void validate(std::uint32_t levels) const;
};

// Pixel rectangle [x0, x0 + w) x [y0, y0 + h); x wraps around the frame width.
struct WrappedRect {
    std::uint32_t x0 = 0, y0 = 0, w = 0, h = 0;
};

// Bounding box of the set cells of one eye, in frame pixels, choosing the
// smallest horizontal extent when wrapping around is allowed.
WrappedRect viewport_bounds(const ViewportMask& mask, std::uint32_t width, std::uint32_t height, bool stereo);

// Level masks for a foveated decode of the viewport: the approximation band
// covers the whole viewport and level k details only the level-k window
// around the gaze. The result is closed under synthesis dependencies.
LevelMaskSet foveation_masks(const ViewportMask& viewport, const FoveationSchedule& schedule,
                             const VideoHeader& header);

// Full-resolution pixels the finest foveation window asks for.
BitGrid fovea_target(const ViewportMask& viewport, const FoveationSchedule& schedule, const VideoHeader& header);

struct DecodeStats {
    std::uint64_t bytes_loaded = 0;  // block tables and records read for this call
    std::uint64_t records = 0;       // records feeding the reconstruction
    std::uint64_t reads = 0;
    double load_ms = 0;
    double temporal_ms = 0;
    double synthesis_ms = 0;
    double total_ms = 0;

    DecodeStats& operator+=(const DecodeStats& o);
};

struct DecodeResult {
    Frame pixels;       // zero outside `computed`
    BitGrid footprint;  // pixels equal to a full-frame decode
    BitGrid computed;   // pixels holding reconstructed data
    DecodeStats stats;
};

// Decoding state for one viewer. Keeps the current set and at most one
// prefetched set in memory. Not thread-safe; use one session per client.
class DecodeSession {
public:
    explicit DecodeSession(std::shared_ptr<const VideoFile> file, unsigned threads = 0);
    explicit DecodeSession(const std::filesystem::path& path, unsigned threads = 0);
    ~DecodeSession();

    const VideoHeader& header() const { return file_->header(); }
    const VideoFile& file() const { return *file_; }

    DecodeResult decode_viewport(std::uint32_t frame, const ViewportMask& mask);
    DecodeResult decode_foveated(std::uint32_t frame, const ViewportMask& mask, const FoveationSchedule& schedule);
    DecodeResult decode_full(std::uint32_t frame);

    // Starts loading the set after the last decoded one, restricted to what
    // the mask (and schedule, when foveating) needs. Returns false when there
    // is no next set or it is already resident.
    bool advance(const ViewportMask& next_mask, const std::optional<FoveationSchedule>& schedule = std::nullopt);

    // Sum over every decode of this session.
    const DecodeStats& totals() const { return totals_; }

    std::optional<std::uint32_t> resident_set() const;
    std::optional<std::uint32_t> pending_set() const;

private:
    struct Loaded {
        std::uint32_t set = 0;
        BitGrid blocks;
        SparseCoefficients records;
        std::uint64_t bytes = 0;  // loaded but not yet charged to a decode
        std::uint64_t reads = 0;
    };
    struct Pending {
        std::uint32_t set = 0;
        std::future<Loaded> result;
    };

    LevelMaskSet masks_for(const ViewportMask& mask, const FoveationSchedule* schedule) const;
    Loaded load(std::uint32_t set, const BitGrid& blocks) const;
    void ensure(std::uint32_t set, const BitGrid& blocks, DecodeStats& stats);
    DecodeResult decode(std::uint32_t frame, const LevelMaskSet& masks, const BitGrid* target);

    std::shared_ptr<const VideoFile> file_;
    unsigned threads_;
    std::optional<Loaded> current_;
    std::optional<Pending> pending_;
    std::optional<std::uint32_t> last_set_;
    DecodeStats totals_;
};

}  // namespace wavevid
