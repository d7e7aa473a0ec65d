#pragma once

#include <span>
#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

struct ResampleSpec {
    double target_spacing = 1.0;  // mm
    int image_order = 3;          // B-spline degree, 0..3
    double mask_threshold = 0.5;  // in (0, 1)

    void validate() const;
};

enum class ResampleAxes { All, InPlane };

/// Output grid per resampled axis: n_out = max(1, round(n_in * s_in / s_out)), samples at
/// origin + i * s_out. Values come from a B-spline interpolant of degree `image_order`.
ImageVolume resample_volume(const ImageVolume& volume, const ResampleSpec& spec,
                            ResampleAxes axes = ResampleAxes::All);

/// Linear interpolation of the 0/1 field, then thresholding. Planar masks are resampled
/// in-plane and keep their slice. Throws DegenerateRoiError when nothing survives.
RoiMask resample_mask(const RoiMask& mask, const ResampleSpec& spec);
RoiMask resample_mask(const RoiMask& mask, const ResampleSpec& spec, ResampleAxes axes);

/// Output size along one axis.
int resampled_size(int n_in, double s_in, double s_out);

namespace bspline {

/// Interpolation coefficients of a 1D signal. Outside [0, n-1] the signal is extended by
/// point reflection about the end samples (f(-k) = 2 f(0) - f(k)), so affine signals are
/// reproduced exactly everywhere.
std::vector<double> coefficients(std::span<const double> samples, int order);

/// Evaluates the spline with the given coefficients at continuous index u.
double evaluate(std::span<const double> coeffs, int order, double u);

}  // namespace bspline

}  // namespace radiomx
