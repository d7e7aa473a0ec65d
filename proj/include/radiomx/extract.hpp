#pragma once

#include <string_view>
#include <vector>

#include "radiomx/volume.hpp"
#include "radiomx/wavelet.hpp"

namespace radiomx {

enum class Modality { M2D, M2_5D, M3D };
inline constexpr std::array<Modality, 3> kAllModalities{Modality::M2D, Modality::M2_5D, Modality::M3D};

std::string_view modality_name(Modality m);  // "2D", "2.5D", "3D"
Modality parse_modality(std::string_view name);
/// File-name friendly form: "2d", "2p5d", "3d".
std::string_view modality_slug(Modality m);

struct ExtractConfig {
    int bin_count = 32;
    WaveletFilter wavelet = WaveletFilter::haar();
};

struct FeatureVector {
    Modality modality = Modality::M3D;
    std::vector<double> values;  // catalog order
    double extraction_seconds = 0.0;
};

/// Features of an already resampled ROI. M2D needs a planar mask, M3D and M2_5D a volumetric
/// one. M2_5D averages the M2D vectors of every ROI-bearing slice.
FeatureVector extract(const ImageVolume& volume, const RoiMask& mask, Modality modality,
                      const ExtractConfig& config = {});

/// Full per-ROI path from the native scan and its 3D annotation: crop around the ROI,
/// resample (isotropic for M3D, in-plane for M2D/M2_5D), extract. M2D uses the
/// largest-area slice. The recorded time covers the whole path.
FeatureVector extract_roi(const ImageVolume& volume, const RoiMask& mask3d, Modality modality,
                          double spacing, const ExtractConfig& config = {});

}  // namespace radiomx
