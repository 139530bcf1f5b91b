// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wavevid {

// Per temporal frame and channel normalization ranges.
struct BandExtrema {
    float approx_min = 0, approx_max = 0;
    float detail_min = 0, detail_max = 0;
    friend bool operator==(const BandExtrema&, const BandExtrema&) = default;
};

struct RecordKey {
    std::uint32_t temporal = 0;
    std::uint32_t block = 0;
    std::uint16_t offset = 0;
    friend bool operator==(const RecordKey&, const RecordKey&) = default;
};

// Stored coefficients. Each record carries one value per channel, either
// quantized to a byte or (debug mode) as a raw float.
struct SparseCoefficients {
    std::uint32_t channels = 0;
    bool raw = false;
    std::vector<RecordKey> keys;
    std::vector<std::uint8_t> quantized;  // keys.size() * channels when !raw
    std::vector<float> values;            // keys.size() * channels when raw

    std::size_t size() const { return keys.size(); }
    std::size_t record_bytes() const { return 2 + channels * (raw ? 4 : 1); }
    void append(const SparseCoefficients& other, std::size_t index);

    friend bool operator==(const SparseCoefficients&, const SparseCoefficients&) = default;
};

struct EncodedSet {
    std::vector<BandExtrema> extrema;       // [t' * channels + channel]
    std::vector<std::uint64_t> block_ends;  // [t' * block_count + block]
    SparseCoefficients records;

    friend bool operator==(const EncodedSet&, const EncodedSet&) = default;
};

}  // namespace wavevid
