#include "radiomx/wavelet.hpp"

#include <cmath>

namespace radiomx {

WaveletFilter WaveletFilter::haar() {
    const double r = 1.0 / std::sqrt(2.0);
    return {{r, r}, {r, -r}};
}

namespace {

long fold_index(long k, long n, WaveletBoundary boundary) {
    if (n == 1) return 0;
    if (boundary == WaveletBoundary::Periodic) return ((k % n) + n) % n;
    const long period = 2 * (n - 1);
    k = ((k % period) + period) % period;
    return k < n ? k : period - k;
}

std::vector<double> filter_axis(const std::vector<double>& in, const Dims& d, int axis,
                                const std::vector<double>& taps, WaveletBoundary boundary) {
    std::vector<double> out(in.size());
    const long n = d[axis];
    std::size_t stride = 1;
    for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(d[a]);
    // Folded neighbour offsets per position along the axis.
    std::vector<std::vector<long>> idx(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < taps.size(); ++k) {
            idx[static_cast<std::size_t>(i)].push_back(fold_index(i + static_cast<long>(k), n, boundary));
        }
    }
    const int nz = axis == 2 ? 1 : d[2];
    const int ny = axis == 1 ? 1 : d[1];
    const int nx = axis == 0 ? 1 : d[0];
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const std::size_t base =
                    (static_cast<std::size_t>(z) * d[1] + static_cast<std::size_t>(y)) * d[0] + static_cast<std::size_t>(x);
                for (long i = 0; i < n; ++i) {
                    double v = 0.0;
                    const auto& ix = idx[static_cast<std::size_t>(i)];
                    for (std::size_t k = 0; k < taps.size(); ++k) {
                        v += taps[k] * in[base + static_cast<std::size_t>(ix[k]) * stride];
                    }
                    out[base + static_cast<std::size_t>(i) * stride] = v;
                }
            }
        }
    }
    return out;
}

}  // namespace

std::array<WaveletBand, 8> swt3(const ImageVolume& volume, const WaveletFilter& filter, WaveletBoundary boundary) {
    const Dims& d = volume.dims();
    // Bands are built x first, so after three axes band b has bit 2 = x, bit 1 = y, bit 0 = z
    // (bit set = high pass), matching kBandLabels order.
    std::vector<std::vector<double>> stage{volume.voxels()};
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<std::vector<double>> next;
        next.reserve(stage.size() * 2);
        for (const auto& s : stage) {
            next.push_back(filter_axis(s, d, axis, filter.low, boundary));
            next.push_back(filter_axis(s, d, axis, filter.high, boundary));
        }
        stage = std::move(next);
    }
    std::array<WaveletBand, 8> bands;
    for (std::size_t b = 0; b < 8; ++b) {
        bands[b] = WaveletBand{kBandLabels[b], ImageVolume(volume.geometry(), std::move(stage[b]))};
    }
    return bands;
}

}  // namespace radiomx
