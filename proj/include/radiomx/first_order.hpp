#pragma once

#include <array>
#include <span>
#include <string_view>

#include "radiomx/discretize.hpp"

namespace radiomx {

inline constexpr std::array<std::string_view, 18> kFirstOrderNames{
    "Energy",  "TotalEnergy",        "Entropy",  "Minimum",  "10Percentile",
    "90Percentile", "Maximum",       "Mean",     "Median",   "InterquartileRange",
    "Range",   "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation", "RootMeanSquared",
    "Variance", "StandardDeviation", "Skewness", "Kurtosis"};

/// Percentile with linear interpolation between closest ranks (q in [0, 100]).
double percentile(std::span<const double> sorted, double q);

/// `values` are the ROI intensities, `levels` their discretized gray levels (for Entropy).
/// Variance is the population variance; Kurtosis is m4 / m2^2 (not excess). Skewness and
/// Kurtosis are 0 when the ROI is constant.
std::array<double, 18> first_order(std::span<const double> values, std::span<const int> levels,
                                   double voxel_volume);

/// Convenience overload that discretizes with `bin_count` bins.
std::array<double, 18> first_order(const ImageVolume& volume, const RoiMask& mask, int bin_count);

}  // namespace radiomx
