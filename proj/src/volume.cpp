#include "radiomx/volume.hpp"

#include <algorithm>
#include <cmath>

namespace radiomx {

void Geometry::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1) {
            throw InvalidArgument("geometry: dimension " + std::to_string(a) + " must be positive");
        }
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
            throw InvalidArgument("geometry: spacing " + std::to_string(a) + " must be positive");
        }
        if (!std::isfinite(origin[a])) {
            throw InvalidArgument("geometry: origin must be finite");
        }
    }
}

ImageVolume::ImageVolume(Geometry geometry, std::vector<double> voxels)
    : geometry_(geometry), voxels_(std::move(voxels)) {
    geometry_.validate();
    if (voxels_.size() != geometry_.voxel_count()) {
        throw InvalidArgument("volume: voxel count " + std::to_string(voxels_.size()) +
                              " does not match dims (" + std::to_string(geometry_.voxel_count()) + ")");
    }
    if (!std::all_of(voxels_.begin(), voxels_.end(), [](double v) { return std::isfinite(v); })) {
        throw InvalidArgument("volume: non-finite voxel value");
    }
}

ImageVolume::ImageVolume(Geometry geometry, double fill)
    : ImageVolume(geometry, std::vector<double>(geometry.voxel_count(), fill)) {}

RoiMask::RoiMask(Geometry geometry, std::vector<std::uint8_t> voxels, std::optional<int> slice)
    : geometry_(geometry), voxels_(std::move(voxels)), slice_(slice) {
    geometry_.validate();
    if (voxels_.size() != geometry_.voxel_count()) {
        throw InvalidArgument("mask: voxel count does not match dims");
    }
    bool any = false;
    for (auto& v : voxels_) {
        v = v != 0 ? 1 : 0;
        any = any || v != 0;
    }
    if (!any) {
        throw DegenerateRoiError("mask: ROI is empty");
    }
    if (slice_) {
        if (*slice_ < 0 || *slice_ >= geometry_.dims[2]) {
            throw InvalidArgument("mask: slice index out of range");
        }
        const std::size_t plane = static_cast<std::size_t>(geometry_.dims[0]) * geometry_.dims[1];
        for (std::size_t i = 0; i < voxels_.size(); ++i) {
            if (voxels_[i] != 0 && static_cast<int>(i / plane) != *slice_) {
                throw InvalidArgument("mask: planar mask has voxels off slice " + std::to_string(*slice_));
            }
        }
    }
}

std::size_t RoiMask::count() const {
    return static_cast<std::size_t>(std::count(voxels_.begin(), voxels_.end(), std::uint8_t{1}));
}

RoiMask RoiMask::as_volumetric() const {
    RoiMask out = *this;
    out.slice_.reset();
    return out;
}

}  // namespace radiomx
