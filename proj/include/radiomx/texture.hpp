#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "radiomx/discretize.hpp"

namespace radiomx {

/// The ROI has no voxel pairs (GLCM) or no voxel with an in-ROI neighbour (NGTDM).
class DegenerateTextureError : public Error {
public:
    using Error::Error;
};

/// Dense row-major count matrix. Row r holds gray level r + 1; column c holds level,
/// run length, zone size or dependence c + 1 depending on the matrix.
struct CountMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    CountMatrix() = default;
    CountMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    [[nodiscard]] double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    [[nodiscard]] double sum() const;

    friend bool operator==(const CountMatrix&, const CountMatrix&) = default;
};

using Offset = std::array<int, 3>;

/// The 13 unique volumetric and 4 unique in-plane unit offsets (Chebyshev distance 1).
const std::vector<Offset>& directions(bool planar);

/// Per-direction symmetric co-occurrence counts (Ng x Ng).
struct Glcm {
    std::vector<CountMatrix> per_direction;
};
/// Per-direction run-length counts (Ng x longest run).
struct Glrlm {
    std::vector<CountMatrix> per_direction;
    std::size_t voxel_count = 0;
};
/// Size-zone counts (Ng x largest zone); 26-connected, 8-connected in-plane.
struct Glszm {
    CountMatrix zones;
    std::size_t voxel_count = 0;
};
/// Dependence counts (Ng x 27, or Ng x 9 in-plane). Dependence = number of voxels with the
/// same level in the Chebyshev-1 neighbourhood, centre included.
struct Gldm {
    CountMatrix dependence;
};
/// Per-level voxel counts n_i and summed |i - neighbourhood mean| s_i.
struct Ngtdm {
    std::vector<double> n;
    std::vector<double> s;
};

Glcm glcm(const DiscretizedRoi& roi);
Glrlm glrlm(const DiscretizedRoi& roi);
Glszm glszm(const DiscretizedRoi& roi);
Gldm gldm(const DiscretizedRoi& roi);
Ngtdm ngtdm(const DiscretizedRoi& roi);

inline constexpr std::array<std::string_view, 24> kGlcmNames{
    "Autocorrelation", "JointAverage",  "ClusterProminence", "ClusterShade",       "ClusterTendency",
    "Contrast",        "Correlation",   "DifferenceAverage", "DifferenceEntropy",  "DifferenceVariance",
    "JointEnergy",     "JointEntropy",  "Imc1",              "Imc2",               "Idm",
    "Idmn",            "Id",            "Idn",               "InverseVariance",    "MaximumProbability",
    "SumAverage",      "SumEntropy",    "SumSquares",        "MCC"};

inline constexpr std::array<std::string_view, 16> kGlrlmNames{
    "ShortRunEmphasis",          "LongRunEmphasis",
    "GrayLevelNonUniformity",    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",    "RunLengthNonUniformityNormalized",
    "RunPercentage",             "GrayLevelVariance",
    "RunVariance",               "RunEntropy",
    "LowGrayLevelRunEmphasis",   "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",  "LongRunHighGrayLevelEmphasis"};

inline constexpr std::array<std::string_view, 16> kGlszmNames{
    "SmallAreaEmphasis",         "LargeAreaEmphasis",
    "GrayLevelNonUniformity",    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",     "SizeZoneNonUniformityNormalized",
    "ZonePercentage",            "GrayLevelVariance",
    "ZoneVariance",              "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",  "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis", "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis", "LargeAreaHighGrayLevelEmphasis"};

inline constexpr std::array<std::string_view, 14> kGldmNames{
    "SmallDependenceEmphasis",   "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized", "GrayLevelVariance",
    "DependenceVariance",        "DependenceEntropy",
    "LowGrayLevelEmphasis",      "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis", "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LargeDependenceHighGrayLevelEmphasis"};

inline constexpr std::array<std::string_view, 5> kNgtdmNames{"Coarseness", "Contrast", "Busyness", "Complexity",
                                                            "Strength"};

/// Coarseness when the ROI has no gray-tone differences at all.
inline constexpr double kCoarsenessCap = 1e6;

/// Features of one normalized-or-not co-occurrence matrix; `ng` is the bin count used by Idmn/Idn.
std::array<double, 24> glcm_features(const CountMatrix& counts, int ng);
/// Unweighted mean over directions that have at least one pair. Throws DegenerateTextureError
/// when no direction has pairs.
std::array<double, 24> glcm_features(const Glcm& m, int ng);

std::array<double, 16> glrlm_features(const CountMatrix& runs, std::size_t voxel_count);
std::array<double, 16> glrlm_features(const Glrlm& m);
std::array<double, 16> glszm_features(const Glszm& m);
std::array<double, 14> gldm_features(const Gldm& m);
/// Throws DegenerateTextureError when no voxel has a neighbour.
std::array<double, 5> ngtdm_features(const Ngtdm& m);

/// Feature values substituted for degenerate ROIs (a single-level, single-entry matrix).
std::array<double, 24> glcm_degenerate_features(int ng);
std::array<double, 5> ngtdm_degenerate_features();

}  // namespace radiomx
