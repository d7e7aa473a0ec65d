#include "radiomx/first_order.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace radiomx {

double percentile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InvalidArgument("percentile of an empty sample");
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::array<double, 18> first_order(std::span<const double> values, std::span<const int> levels,
                                   double voxel_volume) {
    if (values.empty()) throw DegenerateRoiError("first order: empty ROI");
    const auto n = static_cast<double>(values.size());
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());

    double sum = 0, sumsq = 0;
    for (double v : s) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    double m2 = 0, m3 = 0, m4 = 0, mad = 0;
    for (double v : s) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += std::abs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;

    const double p10 = percentile(s, 10), p90 = percentile(s, 90);
    double rsum = 0;
    std::size_t rn = 0;
    for (double v : s) {
        if (v < p10 || v > p90) continue;
        rsum += v;
        ++rn;
    }
    double rmad = 0;
    if (rn > 0) {
        const double rmean = rsum / static_cast<double>(rn);
        for (double v : s) {
            if (v < p10 || v > p90) continue;
            rmad += std::abs(v - rmean);
        }
        rmad /= static_cast<double>(rn);
    }

    std::map<int, double> hist;
    for (int l : levels) hist[l] += 1.0;
    double entropy = 0;
    for (const auto& [l, c] : hist) {
        const double p = c / static_cast<double>(levels.size());
        entropy -= p * std::log2(p);
    }

    const bool constant = s.front() == s.back();
    const double skew = constant ? 0.0 : m3 / std::pow(m2, 1.5);
    const double kurt = constant ? 0.0 : m4 / (m2 * m2);
    return {sumsq,
            sumsq * voxel_volume,
            entropy,
            s.front(),
            p10,
            p90,
            s.back(),
            mean,
            percentile(s, 50),
            percentile(s, 75) - percentile(s, 25),
            s.back() - s.front(),
            mad,
            rmad,
            std::sqrt(sumsq / n),
            m2,
            std::sqrt(m2),
            skew,
            kurt};
}

std::array<double, 18> first_order(const ImageVolume& volume, const RoiMask& mask, int bin_count) {
    const auto values = roi_values(volume, mask);
    const auto d = discretize(volume, mask, bin_count);
    std::vector<int> levels;
    levels.reserve(values.size());
    for (int l : d.levels)
        if (l > 0) levels.push_back(l);
    return first_order(values, levels, volume.geometry().voxel_volume());
}

}  // namespace radiomx
