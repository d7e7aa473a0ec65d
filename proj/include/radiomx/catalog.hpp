#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace radiomx {

enum class FeatureClass { Shape, FirstOrder, Glcm, Glrlm, Glszm, Gldm, Ngtdm };

std::string_view class_name(FeatureClass c);  // "shape", "firstorder", "glcm", ...

struct FeatureDescriptor {
    std::string filter;  // "original" or a wavelet band label
    FeatureClass cls;
    std::string name;

    /// `filter_class_name`, the CSV column name.
    [[nodiscard]] std::string full_name() const;
};

/// Fixed order: original shape, first order, glcm, glrlm, glszm, gldm, ngtdm; then for each
/// wavelet band (LLL .. HHH) the same without shape. 107 + 8 x 93 = 851 entries.
const std::vector<FeatureDescriptor>& catalog();
const std::vector<std::string>& feature_names();

inline constexpr std::size_t kOriginalFeatureCount = 107;
inline constexpr std::size_t kBandFeatureCount = 93;
inline constexpr std::size_t kCatalogSize = kOriginalFeatureCount + 8 * kBandFeatureCount;

}  // namespace radiomx
