#include "radiomx/resample.hpp"

#include <array>
#include <cmath>

namespace radiomx {

void ResampleSpec::validate() const {
    if (!(target_spacing > 0.0) || !std::isfinite(target_spacing)) {
        throw InvalidArgument("resample: target spacing must be positive");
    }
    if (image_order < 0 || image_order > 3) throw InvalidArgument("resample: spline order must be in 0..3");
    if (!(mask_threshold > 0.0 && mask_threshold < 1.0)) {
        throw InvalidArgument("resample: mask threshold must be in (0, 1)");
    }
}

int resampled_size(int n_in, double s_in, double s_out) {
    const double n = std::round(static_cast<double>(n_in) * s_in / s_out);
    return std::max(1, static_cast<int>(n));
}

namespace bspline {
namespace {

// Point-reflected extension of c beyond [0, n-1].
double extended(std::span<const double> c, long k) {
    const long n = static_cast<long>(c.size());
    if (n == 1) return c[0];
    double offset = 0.0;
    double sign = 1.0;
    while (k < 0 || k > n - 1) {
        if (k < 0) {
            offset += sign * 2.0 * c[0];
            sign = -sign;
            k = -k;
        } else {
            offset += sign * 2.0 * c[static_cast<std::size_t>(n - 1)];
            sign = -sign;
            k = 2 * (n - 1) - k;
        }
    }
    return offset + sign * c[static_cast<std::size_t>(k)];
}

// Tap offsets and weights of the degree-`order` kernel at u.
struct Taps {
    long first = 0;
    int count = 0;
    std::array<double, 4> w{};
};

Taps taps_at(int order, double u) {
    Taps t;
    switch (order) {
        case 0: {
            t.first = static_cast<long>(std::floor(u + 0.5));
            t.count = 1;
            t.w[0] = 1.0;
            break;
        }
        case 1: {
            const double i = std::floor(u);
            const double f = u - i;
            t.first = static_cast<long>(i);
            t.count = 2;
            t.w = {1.0 - f, f, 0.0, 0.0};
            break;
        }
        case 2: {
            const double i = std::floor(u + 0.5);
            const double f = u - i;
            t.first = static_cast<long>(i) - 1;
            t.count = 3;
            t.w = {0.5 * (0.5 - f) * (0.5 - f), 0.75 - f * f, 0.5 * (0.5 + f) * (0.5 + f), 0.0};
            break;
        }
        default: {
            const double i = std::floor(u);
            const double f = u - i;
            const double f2 = f * f;
            const double f3 = f2 * f;
            const double g = 1.0 - f;
            t.first = static_cast<long>(i) - 1;
            t.count = 4;
            t.w = {g * g * g / 6.0, (3.0 * f3 - 6.0 * f2 + 4.0) / 6.0, (-3.0 * f3 + 3.0 * f2 + 3.0 * f + 1.0) / 6.0,
                   f3 / 6.0};
            break;
        }
    }
    return t;
}

}  // namespace

std::vector<double> coefficients(std::span<const double> samples, int order) {
    std::vector<double> c(samples.begin(), samples.end());
    const std::size_t n = c.size();
    if (order < 2 || n < 3) return c;
    // Interior rows: c[k-1] + d*c[k] + c[k+1] = r*f[k]; end rows fixed by the point reflection
    // (c[0] = f[0], c[n-1] = f[n-1]). Thomas algorithm on the interior unknowns.
    const double diag = order == 3 ? 4.0 : 6.0;
    const double rhs_scale = order == 3 ? 6.0 : 8.0;
    const std::size_t m = n - 2;
    std::vector<double> cp(m), dp(m);
    for (std::size_t i = 0; i < m; ++i) {
        double rhs = rhs_scale * samples[i + 1];
        if (i == 0) rhs -= samples[0];
        if (i == m - 1) rhs -= samples[n - 1];
        const double denom = diag - (i == 0 ? 0.0 : cp[i - 1]);
        cp[i] = 1.0 / denom;
        dp[i] = (rhs - (i == 0 ? 0.0 : dp[i - 1])) / denom;
    }
    c[m] = dp[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) dp[i] -= cp[i] * dp[i + 1];
    for (std::size_t i = 0; i < m; ++i) c[i + 1] = dp[i];
    return c;
}

double evaluate(std::span<const double> coeffs, int order, double u) {
    const Taps t = taps_at(order, u);
    double v = 0.0;
    for (int j = 0; j < t.count; ++j) v += t.w[static_cast<std::size_t>(j)] * extended(coeffs, t.first + j);
    return v;
}

}  // namespace bspline

namespace {

// Resamples every line of `in` along `axis` to `n_out` samples at step `ratio` (input index units).
std::vector<double> resample_axis(const std::vector<double>& in, const Dims& dims, int axis, int n_out,
                                  double ratio, int order) {
    Dims out_dims = dims;
    out_dims[axis] = n_out;
    const std::size_t n_in = static_cast<std::size_t>(dims[axis]);
    std::size_t stride_in = 1, stride_out = 1;
    for (int a = 0; a < axis; ++a) {
        stride_in *= static_cast<std::size_t>(dims[a]);
        stride_out *= static_cast<std::size_t>(out_dims[a]);
    }

    // The spline value is linear in the coefficients, so each output sample is a fixed weighted
    // sum of in-range coefficients (boundary reflection folded in). Probe the weights once.
    std::vector<std::vector<std::pair<std::size_t, double>>> weights(static_cast<std::size_t>(n_out));
    std::vector<double> probe(n_in, 0.0);
    for (int i = 0; i < n_out; ++i) {
        for (std::size_t k = 0; k < n_in; ++k) {
            probe[k] = 1.0;
            const double w = bspline::evaluate(probe, order, i * ratio);
            probe[k] = 0.0;
            if (w != 0.0) weights[static_cast<std::size_t>(i)].emplace_back(k, w);
        }
    }

    std::vector<double> out(static_cast<std::size_t>(out_dims[0]) * out_dims[1] * out_dims[2]);
    std::vector<double> line(n_in);
    const int nz = axis == 2 ? 1 : dims[2];
    const int ny = axis == 1 ? 1 : dims[1];
    const int nx = axis == 0 ? 1 : dims[0];
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const std::size_t base_in =
                    (static_cast<std::size_t>(z) * dims[1] + static_cast<std::size_t>(y)) * dims[0] + static_cast<std::size_t>(x);
                const std::size_t base_out = (static_cast<std::size_t>(z) * out_dims[1] + static_cast<std::size_t>(y)) *
                                                 out_dims[0] +
                                             static_cast<std::size_t>(x);
                for (std::size_t k = 0; k < n_in; ++k) line[k] = in[base_in + k * stride_in];
                const auto c = bspline::coefficients(line, order);
                for (int i = 0; i < n_out; ++i) {
                    double v = 0.0;
                    for (const auto& [k, w] : weights[static_cast<std::size_t>(i)]) v += w * c[k];
                    out[base_out + static_cast<std::size_t>(i) * stride_out] = v;
                }
            }
        }
    }
    return out;
}

struct GridPlan {
    Geometry out;
    std::array<bool, 3> active{};
};

GridPlan plan(const Geometry& in, const ResampleSpec& spec, ResampleAxes axes) {
    spec.validate();
    GridPlan p{in, {true, true, axes == ResampleAxes::All}};
    for (int a = 0; a < 3; ++a) {
        if (!p.active[a]) continue;
        p.out.dims[a] = resampled_size(in.dims[a], in.spacing[a], spec.target_spacing);
        p.out.spacing[a] = spec.target_spacing;
    }
    return p;
}

std::vector<double> resample_values(std::vector<double> values, const Geometry& in, const GridPlan& p, int order) {
    Dims dims = in.dims;
    for (int a = 0; a < 3; ++a) {
        if (!p.active[a]) continue;
        values = resample_axis(values, dims, a, p.out.dims[a], p.out.spacing[a] / in.spacing[a], order);
        dims[a] = p.out.dims[a];
    }
    return values;
}

}  // namespace

ImageVolume resample_volume(const ImageVolume& volume, const ResampleSpec& spec, ResampleAxes axes) {
    const GridPlan p = plan(volume.geometry(), spec, axes);
    return ImageVolume(p.out, resample_values(volume.voxels(), volume.geometry(), p, spec.image_order));
}

RoiMask resample_mask(const RoiMask& mask, const ResampleSpec& spec) {
    return resample_mask(mask, spec, mask.is_planar() ? ResampleAxes::InPlane : ResampleAxes::All);
}

RoiMask resample_mask(const RoiMask& mask, const ResampleSpec& spec, ResampleAxes axes) {
    if (mask.is_planar() && axes == ResampleAxes::All) {
        throw InvalidArgument("resample_mask: planar masks are resampled in-plane only");
    }
    const GridPlan p = plan(mask.geometry(), spec, axes);
    std::vector<double> field(mask.voxels().begin(), mask.voxels().end());
    field = resample_values(std::move(field), mask.geometry(), p, 1);
    std::vector<std::uint8_t> bits(field.size());
    bool any = false;
    for (std::size_t i = 0; i < field.size(); ++i) {
        bits[i] = field[i] >= spec.mask_threshold ? 1 : 0;
        any = any || bits[i] != 0;
    }
    if (!any) throw DegenerateRoiError("resample_mask: resampling annihilated the ROI");
    return RoiMask(p.out, std::move(bits), mask.slice_index());
}

}  // namespace radiomx
