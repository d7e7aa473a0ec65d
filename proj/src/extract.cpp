#include "radiomx/extract.hpp"

#include <chrono>

#include "radiomx/catalog.hpp"
#include "radiomx/discretize.hpp"
#include "radiomx/first_order.hpp"
#include "radiomx/resample.hpp"
#include "radiomx/roi.hpp"
#include "radiomx/shape.hpp"
#include "radiomx/texture.hpp"

namespace radiomx {

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::M2D: return "2D";
        case Modality::M2_5D: return "2.5D";
        case Modality::M3D: return "3D";
    }
    return "?";
}

std::string_view modality_slug(Modality m) {
    switch (m) {
        case Modality::M2D: return "2d";
        case Modality::M2_5D: return "2p5d";
        case Modality::M3D: return "3d";
    }
    return "?";
}

Modality parse_modality(std::string_view name) {
    for (Modality m : kAllModalities)
        if (name == modality_name(m) || name == modality_slug(m)) return m;
    throw InvalidArgument("unknown modality: " + std::string(name));
}

namespace {

template <std::size_t N>
void append(std::vector<double>& out, const std::array<double, N>& a) {
    out.insert(out.end(), a.begin(), a.end());
}

void intensity_features(std::vector<double>& out, const ImageVolume& image, const RoiMask& mask, int bin_count) {
    const DiscretizedRoi d = discretize(image, mask, bin_count);
    const auto values = roi_values(image, mask);
    std::vector<int> levels;
    levels.reserve(values.size());
    for (int l : d.levels)
        if (l > 0) levels.push_back(l);
    append(out, first_order(values, levels, image.geometry().voxel_volume()));
    try {
        append(out, glcm_features(glcm(d), d.ng));
    } catch (const DegenerateTextureError&) {
        append(out, glcm_degenerate_features(d.ng));
    }
    append(out, glrlm_features(glrlm(d)));
    append(out, glszm_features(glszm(d)));
    append(out, gldm_features(gldm(d)));
    try {
        append(out, ngtdm_features(ngtdm(d)));
    } catch (const DegenerateTextureError&) {
        append(out, ngtdm_degenerate_features());
    }
}

// Single-image catalog for a planar or volumetric ROI. The wavelet needs only the next sample
// along each axis, so a crop to the bounding box plus one voxel is exact.
std::vector<double> single(const ImageVolume& volume, const RoiMask& mask, const ExtractConfig& config) {
    const Box box = padded_box(mask, {1, 1, 1});
    const ImageVolume v = crop(volume, box);
    const RoiMask m = crop(mask, box);
    std::vector<double> out;
    out.reserve(kCatalogSize);
    append(out, shape(m));
    intensity_features(out, v, m, config.bin_count);
    for (const auto& band : swt3(v, config.wavelet)) intensity_features(out, band.image, m, config.bin_count);
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FeatureVector extract(const ImageVolume& volume, const RoiMask& mask, Modality modality, const ExtractConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (volume.geometry() != mask.geometry()) throw InvalidArgument("extract: volume and mask grids differ");
    FeatureVector fv;
    fv.modality = modality;
    switch (modality) {
        case Modality::M2D:
            if (!mask.is_planar()) throw InvalidArgument("extract: 2D features need a planar mask");
            fv.values = single(volume, mask, config);
            break;
        case Modality::M3D:
            if (mask.is_planar()) throw InvalidArgument("extract: 3D features need a volumetric mask");
            fv.values = single(volume, mask, config);
            break;
        case Modality::M2_5D: {
            if (mask.is_planar()) throw InvalidArgument("extract: 2.5D features need a volumetric mask");
            const auto slices = mask_slices(mask);
            fv.values.assign(kCatalogSize, 0.0);
            for (int z : slices) {
                const auto s = single(volume, slice_mask(mask, z), config);
                for (std::size_t k = 0; k < s.size(); ++k) fv.values[k] += s[k];
            }
            for (auto& v : fv.values) v /= static_cast<double>(slices.size());
            break;
        }
    }
    fv.extraction_seconds = seconds_since(t0);
    return fv;
}

FeatureVector extract_roi(const ImageVolume& volume, const RoiMask& mask3d, Modality modality, double spacing,
                          const ExtractConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ResampleSpec spec;
    spec.target_spacing = spacing;
    FeatureVector fv;
    if (modality == Modality::M3D) {
        const Box box = padded_box(mask3d, {8, 8, 8});
        fv = extract(resample_volume(crop(volume, box), spec, ResampleAxes::All),
                     resample_mask(crop(mask3d, box), spec, ResampleAxes::All), modality, config);
    } else {
        const RoiMask m = modality == Modality::M2D ? to_2d_roi(mask3d) : mask3d;
        const Box box = padded_box(m, {8, 8, 1});
        fv = extract(resample_volume(crop(volume, box), spec, ResampleAxes::InPlane),
                     resample_mask(crop(m, box), spec, ResampleAxes::InPlane), modality, config);
    }
    fv.extraction_seconds = seconds_since(t0);
    return fv;
}

}  // namespace radiomx
