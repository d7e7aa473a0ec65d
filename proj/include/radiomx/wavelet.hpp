#pragma once

#include <array>
#include <string>
#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

/// Analysis filter pair applied as out[i] = sum_k h[k] * x[i + k].
struct WaveletFilter {
    std::vector<double> low;
    std::vector<double> high;

    static WaveletFilter haar();
};

enum class WaveletBoundary {
    Mirror,    // whole-sample reflection: x[n] = x[n-2]
    Periodic,  // x[n] = x[0]
};

struct WaveletBand {
    std::string label;  // letters in x, y, z order, e.g. "HLL" = high-pass along x
    ImageVolume image;
};

inline constexpr std::array<const char*, 8> kBandLabels{"LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"};

/// Single-level undecimated separable 3D decomposition. Every band keeps the input geometry.
std::array<WaveletBand, 8> swt3(const ImageVolume& volume, const WaveletFilter& filter = WaveletFilter::haar(),
                                WaveletBoundary boundary = WaveletBoundary::Mirror);

}  // namespace radiomx
