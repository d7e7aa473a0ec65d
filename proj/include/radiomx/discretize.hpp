#pragma once

#include <optional>
#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

/// Gray levels 1..ng inside the ROI, 0 outside. A planar ROI keeps its slice and all
/// neighbourhoods are restricted to that plane.
struct DiscretizedRoi {
    Dims dims{1, 1, 1};
    std::vector<int> levels;
    int ng = 1;
    std::optional<int> plane;
    std::size_t voxel_count = 0;

    [[nodiscard]] bool planar() const { return plane.has_value(); }
    [[nodiscard]] int at(int x, int y, int z) const {
        return levels[(static_cast<std::size_t>(z) * dims[1] + static_cast<std::size_t>(y)) * dims[0] +
                      static_cast<std::size_t>(x)];
    }
    [[nodiscard]] bool inside(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2] && at(x, y, z) > 0;
    }
};

/// Fixed bin count: level = min(ng, floor((x - min) / ((max - min) / ng)) + 1).
/// A constant ROI maps to level 1 with ng = 1.
DiscretizedRoi discretize(const ImageVolume& volume, const RoiMask& mask, int bin_count);

/// ROI intensities in storage order.
std::vector<double> roi_values(const ImageVolume& volume, const RoiMask& mask);

}  // namespace radiomx
