// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <mutex>
#include <span>
#include <vector>

#include "wavevid/coefficients.hpp"
#include "wavevid/grid.hpp"
#include "wavevid/layout.hpp"
#include "wavevid/wavelet.hpp"

namespace wavevid {

// .wvv layout, little-endian throughout:
//
//   VideoHeader                       64 bytes
//   SetMeta[set_count]                24 + inter_size * channels * 16 bytes each
//   per set:
//     BlockEnd[inter_size][blocks]    u64 each
//     records                         u16 local offset + channels values
//
// Values are u8 (quantized) or f32 when kFlagRawCoefficients is set.

inline constexpr std::array<char, 4> kMagic{'W', 'V', 'V', 'C'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 64;

inline constexpr std::uint16_t kFlagStereo = 1u << 0;
inline constexpr std::uint16_t kFlagRawCoefficients = 1u << 1;
inline constexpr std::uint16_t kFlagEquirectThreshold = 1u << 2;

struct VideoHeader {
    std::uint16_t version = kFormatVersion;
    std::uint16_t flags = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t frame_count = 0;
    float fps = 30.0f;
    std::uint8_t channels = 3;
    std::uint8_t levels = 1;
    std::uint8_t inter_size_log2 = 2;
    std::uint8_t block_size_log2 = 5;
    std::uint16_t mask_width = 0;
    std::uint16_t mask_height = 0;
    std::uint8_t pad_frames = 0;

    std::uint32_t inter_size() const { return 1u << inter_size_log2; }
    std::uint32_t block_size() const { return 1u << block_size_log2; }
    std::uint32_t set_count() const { return (frame_count + pad_frames) / inter_size(); }
    bool stereo() const { return flags & kFlagStereo; }
    bool raw() const { return flags & kFlagRawCoefficients; }
    BlockLayout layout() const { return {width, height, levels, block_size()}; }
    std::size_t record_bytes() const { return 2 + std::size_t(channels) * (raw() ? 4 : 1); }
    std::size_t meta_entry_bytes() const { return 24 + std::size_t(inter_size()) * channels * 16; }
    std::size_t block_table_bytes() const {
        return std::size_t(inter_size()) * layout().block_count() * 8;
    }

    friend bool operator==(const VideoHeader&, const VideoHeader&) = default;
};

// Throws FormatError(Invariant) when the fields contradict each other.
void validate(const VideoHeader& header);

struct SetMeta {
    std::uint64_t payload_offset = 0;  // start of the set's BlockEnd table
    std::uint64_t payload_length = 0;  // BlockEnd table plus records
    std::uint64_t record_count = 0;
    std::vector<BandExtrema> extrema;  // [t' * channels + channel]

    friend bool operator==(const SetMeta&, const SetMeta&) = default;
};

struct EncodedVideo {
    VideoHeader header;
    std::vector<EncodedSet> sets;
};

// Offsets and lengths each set receives when written after `header`.
std::vector<SetMeta> layout_sets(const VideoHeader& header, std::span<const EncodedSet> sets);

std::uint64_t write_video(const VideoHeader& header, std::span<const EncodedSet> sets,
                          std::ostream& sink);
std::uint64_t write_video(const EncodedVideo& video, const std::filesystem::path& path);

struct ParsedHeader {
    VideoHeader header;
    std::vector<SetMeta> sets;
};

ParsedHeader read_header(std::istream& source);

// Byte range [first, last] inclusive of blocks for one temporal frame,
// relative to the coefficient data start.
struct ByteRange {
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    std::uint64_t size() const { return end - begin; }
    friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

ByteRange block_range_bytes(std::span<const std::uint64_t> block_ends, std::uint32_t blocks_per_frame,
                            std::uint32_t temporal_index, std::uint32_t first_block,
                            std::uint32_t last_block);

// Parses records of consecutive blocks [first_block, ...] from `bytes`, which
// must hold exactly the coefficient data of those blocks.
void parse_records(std::span<const std::uint8_t> bytes, std::span<const std::uint64_t> block_ends,
                   std::size_t first_entry, std::size_t entry_count, const VideoHeader& header,
                   SparseCoefficients& out);

// Low-resolution binary grid over the whole (mono or stacked stereo) frame.
struct ViewportMask {
    BitGrid cells;
    friend bool operator==(const ViewportMask&, const ViewportMask&) = default;
};

// Full-resolution pixels covered by the mask cells.
BitGrid mask_target(const ViewportMask& mask, std::uint32_t width, std::uint32_t height);

// Blocks (blocks_x * blocks_y grid) holding any coefficient the masks reach.
// The whole approximation band is always included.
BitGrid select_blocks(const LevelMaskSet& masks, const BlockLayout& layout);

// One physical read.
struct IoEvent {
    std::uint64_t offset;
    std::uint64_t length;
};

struct LoadResult {
    SparseCoefficients records;
    std::uint64_t bytes_loaded = 0;   // record bytes delivered
    std::uint64_t bytes_read = 0;     // physical record bytes, including read-through gaps
    std::uint64_t table_bytes = 0;    // block-end entries read
    std::size_t reads = 0;

    std::uint64_t total_bytes() const { return table_bytes + bytes_read; }
};

// An open .wvv file. Header and per-set metadata stay in memory; coefficient
// data is read on demand with positional reads, so concurrent loads are safe.
class VideoFile {
public:
    explicit VideoFile(const std::filesystem::path& path);
    ~VideoFile();
    VideoFile(const VideoFile&) = delete;
    VideoFile& operator=(const VideoFile&) = delete;

    const VideoHeader& header() const { return parsed_.header; }
    const std::vector<SetMeta>& sets() const { return parsed_.sets; }
    const SetMeta& set(std::uint32_t index) const;
    std::uint64_t file_size() const { return file_size_; }

    std::vector<std::uint8_t> read(std::uint64_t offset, std::uint64_t length) const;
    std::vector<std::uint64_t> read_block_ends(std::uint32_t set_index) const;

    // All records of one set.
    SparseCoefficients read_set(std::uint32_t set_index) const;

    // Records of the selected blocks for every temporal frame of the set.
    // Only the block-end entries bounding the selected runs are read. Record
    // ranges separated by at most `max_gap` bytes are fetched with one read.
    LoadResult load_blocks(std::uint32_t set_index, const BitGrid& blocks, std::uint64_t max_gap = 0) const;

    LoadResult load_for_mask(std::uint32_t set_index, const ViewportMask& mask) const;

    // Every physical read is reported here when set. Called concurrently.
    void set_io_observer(std::function<void(const IoEvent&)> observer);

private:
    int fd_ = -1;
    std::uint64_t file_size_ = 0;
    ParsedHeader parsed_;
    mutable std::mutex observer_mutex_;
    std::function<void(const IoEvent&)> observer_;
};

}  // namespace wavevid
