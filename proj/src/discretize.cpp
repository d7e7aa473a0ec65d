#include "radiomx/discretize.hpp"

#include <algorithm>
#include <cmath>

namespace radiomx {

std::vector<double> roi_values(const ImageVolume& volume, const RoiMask& mask) {
    if (volume.geometry().dims != mask.geometry().dims) {
        throw InvalidArgument("volume and mask grids differ");
    }
    std::vector<double> out;
    const auto& m = mask.voxels();
    const auto& v = volume.voxels();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i]) out.push_back(v[i]);
    }
    return out;
}

DiscretizedRoi discretize(const ImageVolume& volume, const RoiMask& mask, int bin_count) {
    if (bin_count < 1) throw InvalidArgument("discretize: bin count must be positive");
    if (volume.geometry().dims != mask.geometry().dims) {
        throw InvalidArgument("discretize: volume and mask grids differ");
    }
    const auto& m = mask.voxels();
    const auto& v = volume.voxels();
    double lo = INFINITY, hi = -INFINITY;
    std::size_t n = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
        ++n;
    }
    if (n == 0) throw DegenerateRoiError("discretize: empty ROI");

    DiscretizedRoi d;
    d.dims = volume.dims();
    d.plane = mask.slice_index();
    d.voxel_count = n;
    d.levels.assign(m.size(), 0);
    if (hi == lo) {
        d.ng = 1;
        for (std::size_t i = 0; i < m.size(); ++i) d.levels[i] = m[i] ? 1 : 0;
        return d;
    }
    d.ng = bin_count;
    const double width = (hi - lo) / bin_count;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i]) continue;
        const double bin = std::floor((v[i] - lo) / width) + 1.0;
        d.levels[i] = static_cast<int>(std::clamp(bin, 1.0, static_cast<double>(bin_count)));
    }
    return d;
}

}  // namespace radiomx
