#include "radiomx/roi.hpp"

#include <algorithm>

namespace radiomx {

std::vector<std::size_t> slice_counts(const RoiMask& mask) {
    const auto& d = mask.dims();
    const std::size_t plane = static_cast<std::size_t>(d[0]) * d[1];
    std::vector<std::size_t> counts(static_cast<std::size_t>(d[2]), 0);
    const auto& v = mask.voxels();
    for (std::size_t i = 0; i < v.size(); ++i) counts[i / plane] += v[i];
    return counts;
}

int largest_area_slice(const RoiMask& mask) {
    const auto counts = slice_counts(mask);
    const auto best = std::max_element(counts.begin(), counts.end());  // first maximum
    if (*best == 0) throw DegenerateRoiError("largest_area_slice: empty mask");
    return static_cast<int>(best - counts.begin());
}

RoiMask slice_mask(const RoiMask& mask, int z) {
    const auto& g = mask.geometry();
    if (z < 0 || z >= g.dims[2]) throw InvalidArgument("slice_mask: slice out of range");
    const std::size_t plane = static_cast<std::size_t>(g.dims[0]) * g.dims[1];
    std::vector<std::uint8_t> bits(mask.voxels().size(), 0);
    const auto first = mask.voxels().begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(z));
    std::copy(first, first + static_cast<std::ptrdiff_t>(plane),
              bits.begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(z)));
    return RoiMask(g, std::move(bits), z);
}

RoiMask to_2d_roi(const RoiMask& mask) { return slice_mask(mask, largest_area_slice(mask)); }

std::vector<int> mask_slices(const RoiMask& mask) {
    std::vector<int> out;
    const auto counts = slice_counts(mask);
    for (std::size_t z = 0; z < counts.size(); ++z) {
        if (counts[z] > 0) out.push_back(static_cast<int>(z));
    }
    return out;
}

Box bounding_box(const RoiMask& mask) {
    const auto& d = mask.dims();
    Box b{{d[0], d[1], d[2]}, {0, 0, 0}};
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                if (!mask.at(x, y, z)) continue;
                b.lo = {std::min(b.lo[0], x), std::min(b.lo[1], y), std::min(b.lo[2], z)};
                b.hi = {std::max(b.hi[0], x + 1), std::max(b.hi[1], y + 1), std::max(b.hi[2], z + 1)};
            }
        }
    }
    return b;
}

Box padded_box(const RoiMask& mask, const Dims& pad) {
    Box b = bounding_box(mask);
    for (int a = 0; a < 3; ++a) {
        b.lo[a] = std::max(0, b.lo[a] - pad[a]);
        b.hi[a] = std::min(mask.dims()[a], b.hi[a] + pad[a]);
    }
    return b;
}

Geometry crop_geometry(const Geometry& g, const Box& box) {
    Geometry out = g;
    for (int a = 0; a < 3; ++a) {
        if (box.lo[a] < 0 || box.hi[a] > g.dims[a] || box.lo[a] >= box.hi[a]) {
            throw InvalidArgument("crop: box outside the grid");
        }
        out.dims[a] = box.hi[a] - box.lo[a];
        out.origin[a] = g.origin[a] + box.lo[a] * g.spacing[a];
    }
    return out;
}

namespace {

template <typename T>
std::vector<T> crop_values(const Geometry& g, const std::vector<T>& v, const Box& box) {
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]) * (box.hi[2] - box.lo[2]));
    for (int z = box.lo[2]; z < box.hi[2]; ++z) {
        for (int y = box.lo[1]; y < box.hi[1]; ++y) {
            const auto row = v.begin() + static_cast<std::ptrdiff_t>(g.index(box.lo[0], y, z));
            out.insert(out.end(), row, row + (box.hi[0] - box.lo[0]));
        }
    }
    return out;
}

}  // namespace

ImageVolume crop(const ImageVolume& volume, const Box& box) {
    return ImageVolume(crop_geometry(volume.geometry(), box), crop_values(volume.geometry(), volume.voxels(), box));
}

RoiMask crop(const RoiMask& mask, const Box& box) {
    std::optional<int> slice;
    if (auto s = mask.slice_index()) slice = *s - box.lo[2];
    return RoiMask(crop_geometry(mask.geometry(), box), crop_values(mask.geometry(), mask.voxels(), box), slice);
}

}  // namespace radiomx
