// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "wavevid/frame.hpp"

namespace wavevid {

// Binary netpbm: P6 for three channels, P5 for one. Only maxval 255.
Frame read_pnm(std::istream& in);
Frame read_pnm(const std::filesystem::path& path);
void write_pnm(const Frame& frame, std::ostream& out);
void write_pnm(const Frame& frame, const std::filesystem::path& path);

// A directory of .ppm/.pgm files in lexicographic order, or one file holding
// concatenated images.
std::vector<Frame> read_frames(const std::filesystem::path& path);

// Uncompressed 24-bit BMP. Single-channel frames are expanded to grey.
std::vector<std::uint8_t> encode_bmp(const Frame& frame);

}  // namespace wavevid
