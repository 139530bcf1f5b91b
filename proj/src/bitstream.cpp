// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/bitstream.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "wavevid/error.hpp"

namespace wavevid {
namespace {

// Little-endian byte writer.
class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}
    template <typename T>
    void put(T v) {
        static_assert(std::is_integral_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(std::uint8_t(std::uint64_t(v) >> (8 * i)));
    }
    void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }

private:
    std::vector<std::uint8_t>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > in_.size()) throw FormatError(FormatFault::Malformed, "unexpected end of data");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(in_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return T(v);
    }
    float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    void skip(std::size_t n) { pos_ += n; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

[[noreturn]] void invariant(const std::string& what) { throw FormatError(FormatFault::Invariant, what); }

void encode_header(const VideoHeader& h, std::vector<std::uint8_t>& out) {
    const std::size_t start = out.size();
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    Writer w(out);
    w.put(h.version);
    w.put(h.flags);
    w.put(h.width);
    w.put(h.height);
    w.put(h.frame_count);
    w.put_f32(h.fps);
    w.put(h.channels);
    w.put(h.levels);
    w.put(h.inter_size_log2);
    w.put(h.block_size_log2);
    w.put(h.mask_width);
    w.put(h.mask_height);
    w.put(h.pad_frames);
    out.resize(start + kHeaderBytes, 0);
}

VideoHeader decode_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes)
        throw FormatError(FormatFault::Malformed,
                          "header needs " + std::to_string(kHeaderBytes) + " bytes, got " + std::to_string(bytes.size()));
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw FormatError(FormatFault::UnsupportedFormat, "not a wavelet video file (bad magic)");
    Reader r(bytes.subspan(4));
    VideoHeader h;
    h.version = r.get<std::uint16_t>();
    if (h.version != kFormatVersion)
        throw FormatError(FormatFault::UnsupportedVersion, "unsupported format version " + std::to_string(h.version));
    h.flags = r.get<std::uint16_t>();
    h.width = r.get<std::uint32_t>();
    h.height = r.get<std::uint32_t>();
    h.frame_count = r.get<std::uint32_t>();
    h.fps = r.get_f32();
    h.channels = r.get<std::uint8_t>();
    h.levels = r.get<std::uint8_t>();
    h.inter_size_log2 = r.get<std::uint8_t>();
    h.block_size_log2 = r.get<std::uint8_t>();
    h.mask_width = r.get<std::uint16_t>();
    h.mask_height = r.get<std::uint16_t>();
    h.pad_frames = r.get<std::uint8_t>();
    validate(h);
    return h;
}

void encode_meta(const VideoHeader& h, const SetMeta& m, std::vector<std::uint8_t>& out) {
    Writer w(out);
    w.put(m.payload_offset);
    w.put(m.payload_length);
    w.put(m.record_count);
    for (const auto& e : m.extrema) {
        w.put_f32(e.approx_min);
        w.put_f32(e.approx_max);
        w.put_f32(e.detail_min);
        w.put_f32(e.detail_max);
    }
    (void)h;
}

std::vector<SetMeta> decode_meta(const VideoHeader& h, std::span<const std::uint8_t> bytes) {
    const std::uint32_t count = h.set_count();
    if (bytes.size() < count * h.meta_entry_bytes())
        throw FormatError(FormatFault::Malformed, "metadata table truncated");
    Reader r(bytes);
    std::vector<SetMeta> sets(count);
    const std::size_t bands = std::size_t(h.inter_size()) * h.channels;
    std::uint64_t expected = kHeaderBytes + count * h.meta_entry_bytes();
    for (std::uint32_t s = 0; s < count; ++s) {
        SetMeta& m = sets[s];
        m.payload_offset = r.get<std::uint64_t>();
        m.payload_length = r.get<std::uint64_t>();
        m.record_count = r.get<std::uint64_t>();
        m.extrema.resize(bands);
        for (auto& e : m.extrema) {
            e.approx_min = r.get_f32();
            e.approx_max = r.get_f32();
            e.detail_min = r.get_f32();
            e.detail_max = r.get_f32();
        }
        if (m.payload_offset != expected)
            invariant("set " + std::to_string(s) + " payload is not contiguous with its predecessor");
        if (m.record_count > (std::uint64_t(-1) - h.block_table_bytes()) / h.record_bytes() ||
            m.payload_length != h.block_table_bytes() + m.record_count * h.record_bytes())
            invariant("set " + std::to_string(s) + " payload length disagrees with its record count");
        expected += m.payload_length;
    }
    return sets;
}

std::uint64_t header_region_bytes(const VideoHeader& h) {
    return kHeaderBytes + std::uint64_t(h.set_count()) * h.meta_entry_bytes();
}

void check_set(const VideoHeader& h, const EncodedSet& s, std::size_t index) {
    const std::string where = "set " + std::to_string(index) + ": ";
    const std::size_t B = h.layout().block_count();
    if (s.extrema.size() != std::size_t(h.inter_size()) * h.channels) throw Error(where + "extrema count mismatch");
    if (s.block_ends.size() != h.inter_size() * B) throw Error(where + "block table size mismatch");
    if (s.records.channels != h.channels || s.records.raw != h.raw())
        throw Error(where + "record format disagrees with the header");
    const std::size_t values = s.records.size() * h.channels;
    if ((h.raw() ? s.records.values.size() : s.records.quantized.size()) != values)
        throw Error(where + "record value count mismatch");
    // Block pointers must describe the records exactly.
    std::vector<std::uint64_t> ends(s.block_ends.size(), 0);
    for (const auto& k : s.records.keys) {
        if (k.temporal >= h.inter_size() || k.block >= B || k.offset >= h.block_size() * h.block_size())
            throw Error(where + "record key out of range");
        ends[std::size_t(k.temporal) * B + k.block] += h.record_bytes();
    }
    for (std::size_t e = 1; e < ends.size(); ++e) ends[e] += ends[e - 1];
    if (ends != s.block_ends) throw Error(where + "block table disagrees with the records");
}

void encode_records(const VideoHeader& h, const EncodedSet& s, std::vector<std::uint8_t>& out) {
    Writer w(out);
    for (std::uint64_t e : s.block_ends) w.put(e);
    const std::uint32_t C = h.channels;
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        w.put(s.records.keys[i].offset);
        if (h.raw())
            for (std::uint32_t c = 0; c < C; ++c) w.put_f32(s.records.values[i * C + c]);
        else
            out.insert(out.end(), s.records.quantized.begin() + i * C, s.records.quantized.begin() + (i + 1) * C);
    }
}

void check_block_ends(std::span<const std::uint64_t> ends, std::uint64_t data_bytes, std::size_t record_bytes) {
    std::uint64_t prev = 0;
    for (std::uint64_t e : ends) {
        if (e < prev) throw CorruptStream("block end pointers decrease");
        if ((e - prev) % record_bytes) throw CorruptStream("block holds a partial record");
        prev = e;
    }
    if (prev != data_bytes) throw CorruptStream("block end pointers do not cover the coefficient data");
}

}  // namespace

void validate(const VideoHeader& h) {
    if (h.width == 0 || h.height == 0) invariant("frame dimensions must be nonzero");
    if (h.channels == 0) invariant("channel count must be nonzero");
    if (h.levels < 1 || h.levels >= 32) invariant("level count out of range");
    const std::uint32_t step = 1u << h.levels;
    if (h.width % step || h.height % step || std::min(h.width, h.height) < step)
        invariant("frame dimensions are not divisible by 2^levels");
    if (h.block_size_log2 > 8) invariant("block size above 256");
    if (h.width % h.block_size() || h.height % h.block_size())
        invariant("block size does not divide the frame dimensions");
    if (h.inter_size_log2 > 8) invariant("inter-frame set size above 256");
    if (h.pad_frames >= h.inter_size()) invariant("more padding frames than one set");
    if ((std::uint64_t(h.frame_count) + h.pad_frames) % h.inter_size())
        invariant("frame count plus padding is not a multiple of the set size");
    if (h.frame_count == 0 && h.pad_frames != 0) invariant("padding without frames");
    if (h.mask_width == 0 || h.mask_height == 0) invariant("mask dimensions must be nonzero");
    if (h.width % h.mask_width || h.height % h.mask_height)
        invariant("mask dimensions must divide the frame dimensions");
    if (h.stereo() && (h.height % 2 || h.mask_height % 2)) invariant("stereo frames need even heights");
    if (h.flags & ~std::uint16_t(kFlagStereo | kFlagRawCoefficients | kFlagEquirectThreshold))
        invariant("unknown header flags");
    if (!(h.fps > 0) || !std::isfinite(h.fps)) invariant("frame rate must be positive");
}

std::vector<SetMeta> layout_sets(const VideoHeader& header, std::span<const EncodedSet> sets) {
    std::vector<SetMeta> metas;
    std::uint64_t offset = header_region_bytes(header);
    for (const auto& s : sets) {
        SetMeta m;
        m.payload_offset = offset;
        m.record_count = s.records.size();
        m.payload_length = header.block_table_bytes() + m.record_count * header.record_bytes();
        m.extrema = s.extrema;
        offset += m.payload_length;
        metas.push_back(std::move(m));
    }
    return metas;
}

std::uint64_t write_video(const VideoHeader& header, std::span<const EncodedSet> sets, std::ostream& sink) {
    validate(header);
    if (sets.size() != header.set_count())
        throw Error("expected " + std::to_string(header.set_count()) + " sets, got " + std::to_string(sets.size()));
    for (std::size_t i = 0; i < sets.size(); ++i) check_set(header, sets[i], i);

    std::vector<std::uint8_t> buf;
    encode_header(header, buf);
    for (const auto& m : layout_sets(header, sets)) encode_meta(header, m, buf);
    std::uint64_t total = 0;
    auto flush = [&] {
        sink.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
        if (!sink) throw Error("write failed");
        total += buf.size();
        buf.clear();
    };
    flush();
    for (const auto& s : sets) {
        encode_records(header, s, buf);
        flush();
    }
    return total;
}

std::uint64_t write_video(const EncodedVideo& video, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create " + path.string());
    const std::uint64_t n = write_video(video.header, video.sets, out);
    out.close();
    if (!out) throw Error("cannot finish writing " + path.string());
    return n;
}

ParsedHeader read_header(std::istream& source) {
    std::vector<std::uint8_t> buf(kHeaderBytes);
    source.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    buf.resize(std::size_t(source.gcount()));
    ParsedHeader out;
    out.header = decode_header(buf);
    buf.assign(header_region_bytes(out.header) - kHeaderBytes, 0);
    source.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    buf.resize(std::size_t(source.gcount()));
    out.sets = decode_meta(out.header, buf);
    return out;
}

ByteRange block_range_bytes(std::span<const std::uint64_t> ends, std::uint32_t blocks_per_frame,
                            std::uint32_t t, std::uint32_t first, std::uint32_t last) {
    if (first > last || last >= blocks_per_frame) throw RangeError("block range out of order or out of range");
    const std::size_t e0 = std::size_t(t) * blocks_per_frame + first;
    const std::size_t e1 = std::size_t(t) * blocks_per_frame + last;
    if (e1 >= ends.size()) throw RangeError("temporal index out of range");
    return {e0 == 0 ? 0 : ends[e0 - 1], ends[e1]};
}

void parse_records(std::span<const std::uint8_t> bytes, std::span<const std::uint64_t> ends,
                   std::size_t first_entry, std::size_t entry_count, const VideoHeader& h,
                   SparseCoefficients& out) {
    const std::size_t B = h.layout().block_count();
    const std::size_t rb = h.record_bytes();
    const std::uint32_t C = h.channels;
    const std::uint32_t cells = h.block_size() * h.block_size();
    if (first_entry + entry_count > ends.size()) throw RangeError("block entries out of range");
    std::uint64_t prev = first_entry == 0 ? 0 : ends[first_entry - 1];
    const std::uint64_t base = prev;
    if (entry_count && ends[first_entry + entry_count - 1] - base != bytes.size())
        throw CorruptStream("coefficient bytes do not match the block range");
    for (std::size_t e = first_entry; e < first_entry + entry_count; ++e) {
        if (ends[e] < prev || (ends[e] - prev) % rb) throw CorruptStream("malformed block end pointer");
        const RecordKey key_base{std::uint32_t(e / B), std::uint32_t(e % B), 0};
        for (std::uint64_t p = prev; p < ends[e]; p += rb) {
            const std::uint8_t* r = bytes.data() + (p - base);
            const std::uint16_t off = std::uint16_t(r[0] | (r[1] << 8));
            if (off >= cells) throw CorruptStream("record offset " + std::to_string(off) + " outside its block");
            out.keys.push_back({key_base.temporal, key_base.block, off});
            if (h.raw()) {
                for (std::uint32_t c = 0; c < C; ++c) {
                    std::uint32_t v = 0;
                    for (int i = 0; i < 4; ++i) v |= std::uint32_t(r[2 + 4 * c + i]) << (8 * i);
                    out.values.push_back(std::bit_cast<float>(v));
                }
            } else {
                out.quantized.insert(out.quantized.end(), r + 2, r + 2 + C);
            }
        }
        prev = ends[e];
    }
}

BitGrid mask_target(const ViewportMask& mask, std::uint32_t width, std::uint32_t height) {
    const auto& m = mask.cells;
    if (m.width == 0 || m.height == 0 || width % m.width || height % m.height)
        throw DimensionError("mask resolution must divide the frame size");
    return upmap(m, width, height);
}

BitGrid select_blocks(const LevelMaskSet& masks, const BlockLayout& layout) {
    if (masks.levels() != layout.levels) throw DimensionError("mask levels disagree with the layout");
    BitGrid blocks(layout.blocks_x(), layout.blocks_y());
    const std::uint32_t bs = layout.block_size;
    // Marks the blocks covering columns [x0, x1) of row y.
    auto mark = [&](std::uint32_t x0, std::uint32_t x1, std::uint32_t y) {
        for (std::uint32_t bx = x0 / bs; bx <= (x1 - 1) / bs; ++bx) blocks(bx, y / bs) = 1;
    };
    for (std::uint32_t y = 0; y < layout.approx_height(); ++y) mark(0, layout.approx_width(), y);
    for (std::uint32_t k = 1; k <= layout.levels; ++k) {
        const BitGrid& m = masks.detail[k - 1];
        const std::uint32_t cw = layout.width >> k, ch = layout.height >> k;
        if (m.width != cw || m.height != ch) throw DimensionError("level mask has the wrong resolution");
        for (std::uint32_t j = 0; j < ch; ++j)
            for_each_run(m.row(j), cw, [&](std::uint32_t a, std::uint32_t b) {
                mark(cw + a, cw + b, j);
                mark(a, b, ch + j);
                mark(cw + a, cw + b, ch + j);
            });
    }
    return blocks;
}

VideoFile::VideoFile(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
    try {
        struct stat st {};
        if (::fstat(fd_, &st) != 0) throw Error("cannot stat " + path.string());
        file_size_ = std::uint64_t(st.st_size);
        const auto head = read(0, std::min<std::uint64_t>(kHeaderBytes, file_size_));
        parsed_.header = decode_header(head);
        const std::uint64_t region = header_region_bytes(parsed_.header);
        if (region > file_size_) throw FormatError(FormatFault::Malformed, "metadata table truncated");
        parsed_.sets = decode_meta(parsed_.header, read(kHeaderBytes, region - kHeaderBytes));
        const std::uint64_t end =
            parsed_.sets.empty() ? region : parsed_.sets.back().payload_offset + parsed_.sets.back().payload_length;
        if (end > file_size_) throw FormatError(FormatFault::Malformed, "coefficient data truncated");
    } catch (...) {
        ::close(fd_);
        throw;
    }
}

VideoFile::~VideoFile() {
    if (fd_ >= 0) ::close(fd_);
}

const SetMeta& VideoFile::set(std::uint32_t index) const {
    if (index >= parsed_.sets.size())
        throw RangeError("set " + std::to_string(index) + " out of range (" + std::to_string(parsed_.sets.size()) +
                         " sets)");
    return parsed_.sets[index];
}

std::vector<std::uint8_t> VideoFile::read(std::uint64_t offset, std::uint64_t length) const {
    if (offset > file_size_ || length > file_size_ - offset)
        throw FormatError(FormatFault::Malformed, "read past the end of the file");
    std::vector<std::uint8_t> buf(length);
    std::uint64_t done = 0;
    while (done < length) {
        const ssize_t n = ::pread(fd_, buf.data() + done, length - done, off_t(offset + done));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw FormatError(FormatFault::Malformed, "short read");
        done += std::uint64_t(n);
    }
    std::lock_guard lock(observer_mutex_);
    if (observer_) observer_({offset, length});
    return buf;
}

std::vector<std::uint64_t> VideoFile::read_block_ends(std::uint32_t set_index) const {
    const SetMeta& m = set(set_index);
    const VideoHeader& h = header();
    const auto bytes = read(m.payload_offset, h.block_table_bytes());
    std::vector<std::uint64_t> ends(bytes.size() / 8);
    for (std::size_t i = 0; i < ends.size(); ++i) ends[i] = get_u64(bytes.data() + 8 * i);
    check_block_ends(ends, m.payload_length - h.block_table_bytes(), h.record_bytes());
    return ends;
}

SparseCoefficients VideoFile::read_set(std::uint32_t set_index) const {
    const SetMeta& m = set(set_index);
    const VideoHeader& h = header();
    const auto bytes = read(m.payload_offset, m.payload_length);
    const std::size_t table = h.block_table_bytes();
    std::vector<std::uint64_t> ends(table / 8);
    for (std::size_t i = 0; i < ends.size(); ++i) ends[i] = get_u64(bytes.data() + 8 * i);
    check_block_ends(ends, m.payload_length - table, h.record_bytes());
    SparseCoefficients out;
    out.channels = h.channels;
    out.raw = h.raw();
    parse_records(std::span(bytes).subspan(table), ends, 0, ends.size(), h, out);
    return out;
}

LoadResult VideoFile::load_blocks(std::uint32_t set_index, const BitGrid& blocks, std::uint64_t max_gap) const {
    const SetMeta& m = set(set_index);
    const VideoHeader& h = header();
    const BlockLayout layout = h.layout();
    const std::uint32_t B = layout.block_count();
    if (blocks.width != layout.blocks_x() || blocks.height != layout.blocks_y())
        throw DimensionError("block selection has the wrong shape");
    const std::uint64_t data_bytes = m.payload_length - h.block_table_bytes();
    const std::uint64_t data_start = m.payload_offset + h.block_table_bytes();

    // Requested pieces: runs of selected blocks in id order, per temporal frame.
    struct Piece {
        std::size_t first_entry, count;
        ByteRange bytes;
    };
    std::vector<Piece> pieces;
    for (std::uint32_t t = 0; t < h.inter_size(); ++t)
        for_each_run(blocks.data.data(), B, [&](std::uint32_t a, std::uint32_t b) {
            pieces.push_back({std::size_t(t) * B + a, b - a, {}});
        });

    LoadResult out;
    out.records.channels = h.channels;
    out.records.raw = h.raw();

    // Block-end entries [first - 1, last] of every piece; touching spans share a read.
    std::vector<std::uint64_t> ends(std::size_t(h.inter_size()) * B, 0);
    for (std::size_t i = 0; i < pieces.size();) {
        const std::size_t lo = pieces[i].first_entry == 0 ? 0 : pieces[i].first_entry - 1;
        std::size_t hi = pieces[i].first_entry + pieces[i].count;  // exclusive
        std::size_t j = i + 1;
        while (j < pieces.size() && pieces[j].first_entry - 1 <= hi) {
            hi = pieces[j].first_entry + pieces[j].count;
            ++j;
        }
        const auto bytes = read(m.payload_offset + lo * 8, (hi - lo) * 8);
        ++out.reads;
        out.table_bytes += bytes.size();
        std::uint64_t prev = 0;
        for (std::size_t e = lo; e < hi; ++e) {
            ends[e] = get_u64(bytes.data() + (e - lo) * 8);
            if (ends[e] > data_bytes || (e > lo && ends[e] < prev)) throw CorruptStream("malformed block end pointer");
            prev = ends[e];
        }
        for (std::size_t p = i; p < j; ++p) {
            const std::size_t first = pieces[p].first_entry, last = first + pieces[p].count - 1;
            pieces[p].bytes = {first == 0 ? 0 : ends[first - 1], ends[last]};
        }
        i = j;
    }

    for (std::size_t i = 0; i < pieces.size();) {
        if (pieces[i].bytes.size() == 0) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        std::uint64_t end = pieces[i].bytes.end;
        while (j < pieces.size() && pieces[j].bytes.begin >= end && pieces[j].bytes.begin - end <= max_gap) {
            end = std::max(end, pieces[j].bytes.end);
            ++j;
        }
        const std::uint64_t begin = pieces[i].bytes.begin;
        const auto bytes = read(data_start + begin, end - begin);
        ++out.reads;
        out.bytes_read += end - begin;
        for (std::size_t p = i; p < j; ++p) {
            const ByteRange r = pieces[p].bytes;
            parse_records(std::span(bytes).subspan(r.begin - begin, r.size()), ends, pieces[p].first_entry,
                          pieces[p].count, h, out.records);
            out.bytes_loaded += r.size();
        }
        i = j;
    }
    return out;
}

LoadResult VideoFile::load_for_mask(std::uint32_t set_index, const ViewportMask& mask) const {
    const VideoHeader& h = header();
    if (mask.cells.width != h.mask_width || mask.cells.height != h.mask_height)
        throw DimensionError("mask is " + std::to_string(mask.cells.width) + "x" + std::to_string(mask.cells.height) +
                             ", file expects " + std::to_string(h.mask_width) + "x" + std::to_string(h.mask_height));
    set(set_index);
    const LevelMaskSet masks = close_dependencies(mask_target(mask, h.width, h.height), h.levels, WaveletKind::Cdf97);
    return load_blocks(set_index, select_blocks(masks, h.layout()));
}

void VideoFile::set_io_observer(std::function<void(const IoEvent&)> observer) {
    std::lock_guard lock(observer_mutex_);
    observer_ = std::move(observer);
}

}  // namespace wavevid
