#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace radiomx {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when an ROI is empty or becomes empty after a geometric operation.
class DegenerateRoiError : public Error {
public:
    using Error::Error;
};

using Vec3 = std::array<double, 3>;
using Dims = std::array<int, 3>;

/// Physical grid shared by volumes and masks. Voxels are stored x-fastest.
struct Geometry {
    Dims dims{1, 1, 1};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};

    [[nodiscard]] std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
    [[nodiscard]] std::size_t index(int x, int y, int z) const {
        return (static_cast<std::size_t>(z) * static_cast<std::size_t>(dims[1]) +
                static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(dims[0]) +
               static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool contains(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
    }
    [[nodiscard]] double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    void validate() const;

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

class ImageVolume {
public:
    ImageVolume() = default;
    ImageVolume(Geometry geometry, std::vector<double> voxels);
    /// Volume filled with a constant.
    ImageVolume(Geometry geometry, double fill);

    [[nodiscard]] const Geometry& geometry() const { return geometry_; }
    [[nodiscard]] const Dims& dims() const { return geometry_.dims; }
    [[nodiscard]] const Vec3& spacing() const { return geometry_.spacing; }
    [[nodiscard]] const Vec3& origin() const { return geometry_.origin; }
    [[nodiscard]] std::size_t size() const { return voxels_.size(); }

    [[nodiscard]] double at(int x, int y, int z) const { return voxels_[geometry_.index(x, y, z)]; }
    double& at(int x, int y, int z) { return voxels_[geometry_.index(x, y, z)]; }

    [[nodiscard]] const std::vector<double>& voxels() const { return voxels_; }
    std::vector<double>& voxels() { return voxels_; }

private:
    Geometry geometry_;
    std::vector<double> voxels_;
};

/// Binary ROI. A planar mask (2D ROI) has nonzero voxels on a single z slice.
class RoiMask {
public:
    RoiMask() = default;
    /// Nonzero input values are stored as 1. Throws DegenerateRoiError when empty.
    RoiMask(Geometry geometry, std::vector<std::uint8_t> voxels,
            std::optional<int> slice = std::nullopt);

    [[nodiscard]] const Geometry& geometry() const { return geometry_; }
    [[nodiscard]] const Dims& dims() const { return geometry_.dims; }
    [[nodiscard]] const Vec3& spacing() const { return geometry_.spacing; }
    [[nodiscard]] bool is_planar() const { return slice_.has_value(); }
    [[nodiscard]] std::optional<int> slice_index() const { return slice_; }

    [[nodiscard]] bool at(int x, int y, int z) const { return voxels_[geometry_.index(x, y, z)] != 0; }
    [[nodiscard]] const std::vector<std::uint8_t>& voxels() const { return voxels_; }
    [[nodiscard]] std::size_t count() const;

    /// Same voxels, retagged as a volumetric mask.
    [[nodiscard]] RoiMask as_volumetric() const;

private:
    Geometry geometry_;
    std::vector<std::uint8_t> voxels_;
    std::optional<int> slice_;
};

}  // namespace radiomx
