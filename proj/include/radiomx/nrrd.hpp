#pragma once

#include <filesystem>

#include "radiomx/volume.hpp"

namespace radiomx {

/// Header, field, or payload problem in an NRRD file. The message names the offending field.
class NrrdError : public Error {
public:
    using Error::Error;
};

enum class NrrdType { Int16, Float32, UInt8 };
enum class NrrdEncoding { Raw, Gzip };

/// Reads a 3D NRRD (NRRD0001..0005 magic, raw or gzip, short/float/uchar).
/// Integer payloads are widened to double.
ImageVolume read_nrrd(const std::filesystem::path& path);

/// Reads a mask; any nonzero voxel counts as foreground. Returns a volumetric mask.
RoiMask read_mask_nrrd(const std::filesystem::path& path);

/// Int16 payloads are rounded and must fit the type.
void write_nrrd(const ImageVolume& volume, const std::filesystem::path& path,
                NrrdType type = NrrdType::Float32, NrrdEncoding encoding = NrrdEncoding::Raw);
void write_nrrd(const RoiMask& mask, const std::filesystem::path& path,
                NrrdEncoding encoding = NrrdEncoding::Raw);

}  // namespace radiomx
