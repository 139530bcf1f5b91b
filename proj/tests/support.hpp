// Shared helpers for the unit tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "wavevid/frame.hpp"
#include "wavevid/grid.hpp"

namespace wavevid::test {

inline Plane random_plane(std::uint32_t w, std::uint32_t h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Plane p(w, h);
    for (auto& v : p.data) v = u(rng);
    return p;
}

inline BitGrid random_mask(std::uint32_t w, std::uint32_t h, double density, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution b(density);
    BitGrid g(w, h);
    for (auto& v : g.data) v = b(rng);
    return g;
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() / ("wavevid-test-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace wavevid::test
