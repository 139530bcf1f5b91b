// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "wavevid/error.hpp"

namespace wavevid {
namespace {

// Next header token, skipping whitespace and comments.
std::string token(std::istream& in) {
    std::string t;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!t.empty()) break;
            continue;
        }
        t.push_back(char(c));
    }
    return t;
}

std::uint32_t number(std::istream& in) {
    const std::string t = token(in);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(ch); }) || t.size() > 9)
        throw DataError("bad netpbm header field '" + t + "'");
    return std::uint32_t(std::stoul(t));
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(std::uint8_t(v));
    b.push_back(std::uint8_t(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(std::uint8_t(v >> (8 * i)));
}

}  // namespace

Frame read_pnm(std::istream& in) {
    const std::string magic = token(in);
    std::uint32_t channels;
    if (magic == "P6")
        channels = 3;
    else if (magic == "P5")
        channels = 1;
    else
        throw DataError("unsupported image format '" + magic + "' (expected binary PPM or PGM)");
    const std::uint32_t w = number(in), h = number(in), maxval = number(in);
    if (maxval != 255) throw DataError("only 8-bit images are supported");
    if (w == 0 || h == 0 || std::uint64_t(w) * h > (1ull << 28)) throw DataError("bad image dimensions");
    Frame f(w, h, channels);
    in.read(reinterpret_cast<char*>(f.pixels.data()), std::streamsize(f.pixels.size()));
    if (in.gcount() != std::streamsize(f.pixels.size())) throw DataError("truncated image data");
    return f;
}

Frame read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read_pnm(in);
}

void write_pnm(const Frame& f, std::ostream& out) {
    if (f.channels != 1 && f.channels != 3) throw DimensionError("netpbm output needs 1 or 3 channels");
    out << (f.channels == 3 ? "P6" : "P5") << '\n' << f.width << ' ' << f.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(f.pixels.data()), std::streamsize(f.pixels.size()));
    if (!out) throw Error("image write failed");
}

void write_pnm(const Frame& f, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create " + path.string());
    write_pnm(f, out);
}

std::vector<Frame> read_frames(const std::filesystem::path& path) {
    std::vector<Frame> frames;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(path)) {
            const auto ext = e.path().extension();
            if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm" || ext == ".pnm")) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) frames.push_back(read_pnm(f));
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        while (in >> std::ws, in.peek() != EOF) frames.push_back(read_pnm(in));
    }
    if (frames.empty()) throw DataError("no frames found in " + path.string());
    return frames;
}

std::vector<std::uint8_t> encode_bmp(const Frame& f) {
    if (f.channels != 1 && f.channels != 3) throw DimensionError("BMP output needs 1 or 3 channels");
    const std::uint32_t stride = (f.width * 3 + 3) & ~3u;
    const std::uint32_t data = stride * f.height;
    std::vector<std::uint8_t> b;
    b.reserve(54 + data);
    b.push_back('B');
    b.push_back('M');
    put_u32(b, 54 + data);
    put_u32(b, 0);
    put_u32(b, 54);
    put_u32(b, 40);
    put_u32(b, f.width);
    put_u32(b, f.height);  // positive: rows stored bottom-up
    put_u16(b, 1);
    put_u16(b, 24);
    put_u32(b, 0);
    put_u32(b, data);
    put_u32(b, 2835);
    put_u32(b, 2835);
    put_u32(b, 0);
    put_u32(b, 0);
    for (std::uint32_t y = f.height; y-- > 0;) {
        for (std::uint32_t x = 0; x < f.width; ++x) {
            if (f.channels == 3) {
                b.push_back(f.at(x, y, 2));
                b.push_back(f.at(x, y, 1));
                b.push_back(f.at(x, y, 0));
            } else {
                b.insert(b.end(), 3, f.at(x, y, 0));
            }
        }
        b.insert(b.end(), stride - f.width * 3, 0);
    }
    return b;
}

}  // namespace wavevid
