#pragma once

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "radiomx/volume.hpp"

namespace testutil {

inline radiomx::Geometry grid(int nx, int ny, int nz, radiomx::Vec3 spacing = {1, 1, 1}) {
    radiomx::Geometry g;
    g.dims = {nx, ny, nz};
    g.spacing = spacing;
    return g;
}

inline radiomx::ImageVolume random_volume(const radiomx::Geometry& g, std::uint64_t seed, double lo = -100,
                                          double hi = 100) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(g.voxel_count());
    for (auto& x : v) x = u(rng);
    return {g, v};
}

inline radiomx::RoiMask full_mask(const radiomx::Geometry& g) {
    return {g, std::vector<std::uint8_t>(g.voxel_count(), 1)};
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("radiomx_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace testutil
