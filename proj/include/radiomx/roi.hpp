#pragma once

#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

/// Nonzero voxel count per z slice.
std::vector<std::size_t> slice_counts(const RoiMask& mask);

/// z index with the most ROI voxels; ties go to the lowest index.
int largest_area_slice(const RoiMask& mask);

/// Keeps only the largest-area slice and tags the result as planar.
RoiMask to_2d_roi(const RoiMask& mask);

/// Planar mask holding slice `z` of `mask`. Throws DegenerateRoiError if that slice is empty.
RoiMask slice_mask(const RoiMask& mask, int z);

/// Slices carrying at least one ROI voxel, ascending.
std::vector<int> mask_slices(const RoiMask& mask);

struct Box {
    Dims lo;  // inclusive
    Dims hi;  // exclusive
    friend bool operator==(const Box&, const Box&) = default;
};

Box bounding_box(const RoiMask& mask);

/// Bounding box grown by `pad` voxels per axis, clamped to the grid.
Box padded_box(const RoiMask& mask, const Dims& pad);

/// Sub-grid of a volume/mask. The origin moves so physical positions are preserved.
Geometry crop_geometry(const Geometry& g, const Box& box);
ImageVolume crop(const ImageVolume& volume, const Box& box);
RoiMask crop(const RoiMask& mask, const Box& box);

}  // namespace radiomx
