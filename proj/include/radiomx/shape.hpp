#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

inline constexpr std::array<std::string_view, 14> kShapeNames{
    "MeshVolume",       "VoxelVolume",     "SurfaceArea",     "SurfaceVolumeRatio",
    "Sphericity",       "Compactness1",    "Compactness2",    "SphericalDisproportion",
    "Maximum3DDiameter", "MajorAxisLength", "MinorAxisLength", "LeastAxisLength",
    "Elongation",       "Flatness"};

/// Gaussian width (voxels) applied to the 0/1 indicator before isosurfacing at 0.5.
inline constexpr double kMeshSmoothing = 0.7;

/// Isosurface of the mask indicator through voxel centres, triangulated by marching
/// tetrahedra (six tetrahedra per cell, vertices linearly interpolated on edges).
/// With sigma = 0 the vertices sit at edge midpoints.
struct Mesh3 {
    double volume = 0.0;
    double area = 0.0;
    std::vector<Vec3> vertices;  // physical mm, relative to the first voxel less the padding
};

/// Planar analogue: marching triangles on the mask slice.
struct Mesh2 {
    double area = 0.0;
    double perimeter = 0.0;
    std::vector<std::array<double, 2>> vertices;
};

/// A smoothed surface enclosing less than half a voxel falls back to sigma = 0.
Mesh3 mesh3(const RoiMask& mask, double sigma = kMeshSmoothing);
Mesh2 mesh2(const RoiMask& mask, double sigma = kMeshSmoothing);

/// 14 shape values. Planar masks fill each slot with its 2D counterpart:
/// MeshVolume = mesh area, VoxelVolume = pixel area, SurfaceArea = perimeter,
/// Sphericity = circularity 2 sqrt(pi A) / P, Compactness1 = A / (sqrt(pi) P^2),
/// Compactness2 = 4 pi A / P^2, SphericalDisproportion = P / (2 sqrt(pi A)),
/// Maximum3DDiameter = maximum 2D diameter, LeastAxisLength = minor axis, Flatness = elongation.
std::array<double, 14> shape(const RoiMask& mask);

}  // namespace radiomx
