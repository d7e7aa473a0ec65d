#include "radiomx/texture.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace radiomx {

double CountMatrix::sum() const { return std::accumulate(data.begin(), data.end(), 0.0); }

const std::vector<Offset>& directions(bool planar) {
    static const std::vector<Offset> volumetric{{1, 0, 0},  {0, 1, 0},  {0, 0, 1},   {1, 1, 0},  {1, -1, 0},
                                                {1, 0, 1},  {1, 0, -1}, {0, 1, 1},   {0, 1, -1}, {1, 1, 1},
                                                {1, 1, -1}, {1, -1, 1}, {1, -1, -1}};
    static const std::vector<Offset> in_plane{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}};
    return planar ? in_plane : volumetric;
}

namespace {

struct Voxel {
    int x, y, z, level;
};

std::vector<Voxel> roi_voxels(const DiscretizedRoi& roi) {
    std::vector<Voxel> out;
    out.reserve(roi.voxel_count);
    const auto& d = roi.dims;
    const int z0 = roi.planar() ? *roi.plane : 0;
    const int z1 = roi.planar() ? *roi.plane + 1 : d[2];
    for (int z = z0; z < z1; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const int l = roi.at(x, y, z);
                if (l > 0) out.push_back({x, y, z, l});
            }
        }
    }
    return out;
}

// Full Chebyshev-1 neighbourhood without the centre.
const std::vector<Offset>& neighbourhood(bool planar) {
    static const std::vector<Offset> full = [] {
        std::vector<Offset> o;
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (dx || dy || dz) o.push_back({dx, dy, dz});
        return o;
    }();
    static const std::vector<Offset> flat = [] {
        std::vector<Offset> o;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                if (dx || dy) o.push_back({dx, dy, 0});
        return o;
    }();
    return planar ? flat : full;
}

int level_at(const DiscretizedRoi& roi, int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= roi.dims[0] || y >= roi.dims[1] || z >= roi.dims[2]) return 0;
    return roi.at(x, y, z);
}

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

Glcm glcm(const DiscretizedRoi& roi) {
    const auto vox = roi_voxels(roi);
    Glcm out;
    bool any = false;
    for (const auto& dir : directions(roi.planar())) {
        CountMatrix c(roi.ng, roi.ng);
        for (const auto& v : vox) {
            const int l2 = level_at(roi, v.x + dir[0], v.y + dir[1], v.z + dir[2]);
            if (l2 == 0) continue;
            c(v.level - 1, l2 - 1) += 1.0;
            c(l2 - 1, v.level - 1) += 1.0;
            any = true;
        }
        out.per_direction.push_back(std::move(c));
    }
    if (!any) throw DegenerateTextureError("glcm: ROI has no neighbouring voxel pairs");
    return out;
}

Glrlm glrlm(const DiscretizedRoi& roi) {
    const auto vox = roi_voxels(roi);
    Glrlm out;
    out.voxel_count = vox.size();
    for (const auto& dir : directions(roi.planar())) {
        std::vector<std::pair<int, int>> runs;  // (level, length)
        int longest = 1;
        for (const auto& v : vox) {
            if (level_at(roi, v.x - dir[0], v.y - dir[1], v.z - dir[2]) == v.level) continue;  // not a run start
            int len = 1;
            while (level_at(roi, v.x + len * dir[0], v.y + len * dir[1], v.z + len * dir[2]) == v.level) ++len;
            runs.emplace_back(v.level, len);
            longest = std::max(longest, len);
        }
        CountMatrix m(roi.ng, longest);
        for (auto [l, len] : runs) m(l - 1, len - 1) += 1.0;
        out.per_direction.push_back(std::move(m));
    }
    return out;
}

Glszm glszm(const DiscretizedRoi& roi) {
    const auto vox = roi_voxels(roi);
    const auto& nb = neighbourhood(roi.planar());
    std::vector<char> seen(roi.levels.size(), 0);
    const auto& d = roi.dims;
    auto flat = [&](int x, int y, int z) {
        return (static_cast<std::size_t>(z) * d[1] + static_cast<std::size_t>(y)) * d[0] + static_cast<std::size_t>(x);
    };
    std::vector<std::pair<int, int>> zones;
    int largest = 1;
    std::vector<Offset> stack;
    for (const auto& v : vox) {
        if (seen[flat(v.x, v.y, v.z)]) continue;
        int size = 0;
        stack.assign(1, {v.x, v.y, v.z});
        seen[flat(v.x, v.y, v.z)] = 1;
        while (!stack.empty()) {
            const Offset p = stack.back();
            stack.pop_back();
            ++size;
            for (const auto& o : nb) {
                const int x = p[0] + o[0], y = p[1] + o[1], z = p[2] + o[2];
                if (level_at(roi, x, y, z) != v.level || seen[flat(x, y, z)]) continue;
                seen[flat(x, y, z)] = 1;
                stack.push_back({x, y, z});
            }
        }
        zones.emplace_back(v.level, size);
        largest = std::max(largest, size);
    }
    Glszm out{CountMatrix(roi.ng, largest), vox.size()};
    for (auto [l, s] : zones) out.zones(l - 1, s - 1) += 1.0;
    return out;
}

Gldm gldm(const DiscretizedRoi& roi) {
    const auto& nb = neighbourhood(roi.planar());
    Gldm out{CountMatrix(roi.ng, static_cast<int>(nb.size()) + 1)};
    for (const auto& v : roi_voxels(roi)) {
        int dep = 1;
        for (const auto& o : nb) dep += level_at(roi, v.x + o[0], v.y + o[1], v.z + o[2]) == v.level;
        out.dependence(v.level - 1, dep - 1) += 1.0;
    }
    return out;
}

Ngtdm ngtdm(const DiscretizedRoi& roi) {
    const auto& nb = neighbourhood(roi.planar());
    Ngtdm out{std::vector<double>(static_cast<std::size_t>(roi.ng), 0.0),
              std::vector<double>(static_cast<std::size_t>(roi.ng), 0.0)};
    for (const auto& v : roi_voxels(roi)) {
        double sum = 0.0;
        int count = 0;
        for (const auto& o : nb) {
            const int l = level_at(roi, v.x + o[0], v.y + o[1], v.z + o[2]);
            if (l == 0) continue;
            sum += l;
            ++count;
        }
        if (count == 0) continue;
        out.n[static_cast<std::size_t>(v.level - 1)] += 1.0;
        out.s[static_cast<std::size_t>(v.level - 1)] += std::abs(v.level - sum / count);
    }
    return out;
}

std::array<double, 24> glcm_features(const CountMatrix& counts, int ng) {
    const int n = counts.rows;
    const double total = counts.sum();
    std::array<double, 24> f{};
    if (total <= 0.0) throw DegenerateTextureError("glcm: empty co-occurrence matrix");

    std::vector<double> p(counts.data.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = counts.data[k] / total;
    auto P = [&](int i, int j) { return p[static_cast<std::size_t>(i) * n + j]; };

    std::vector<double> px(static_cast<std::size_t>(n), 0.0), py(static_cast<std::size_t>(n), 0.0);
    std::vector<double> psum(static_cast<std::size_t>(2 * n + 1), 0.0), pdiff(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = P(i, j);
            if (v == 0.0) continue;
            px[static_cast<std::size_t>(i)] += v;
            py[static_cast<std::size_t>(j)] += v;
            psum[static_cast<std::size_t>(i + j + 2)] += v;
            pdiff[static_cast<std::size_t>(std::abs(i - j))] += v;
        }
    }
    double ux = 0.0, uy = 0.0;
    for (int i = 0; i < n; ++i) {
        ux += (i + 1) * px[static_cast<std::size_t>(i)];
        uy += (i + 1) * py[static_cast<std::size_t>(i)];
    }
    double sx2 = 0.0, sy2 = 0.0, hx = 0.0, hy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx2 += (i + 1 - ux) * (i + 1 - ux) * px[static_cast<std::size_t>(i)];
        sy2 += (i + 1 - uy) * (i + 1 - uy) * py[static_cast<std::size_t>(i)];
        hx -= plogp(px[static_cast<std::size_t>(i)]);
        hy -= plogp(py[static_cast<std::size_t>(i)]);
    }

    double autocorr = 0, prominence = 0, shade = 0, tendency = 0, contrast = 0, energy = 0, hxy = 0, hxy1 = 0,
           hxy2 = 0, maxp = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double pxpy = px[static_cast<std::size_t>(i)] * py[static_cast<std::size_t>(j)];
            if (pxpy > 0.0) hxy2 -= pxpy * std::log2(pxpy);
            const double v = P(i, j);
            if (v == 0.0) continue;
            const double a = i + 1, b = j + 1;
            const double c = a + b - ux - uy;
            autocorr += v * a * b;
            prominence += v * c * c * c * c;
            shade += v * c * c * c;
            tendency += v * c * c;
            contrast += v * (a - b) * (a - b);
            energy += v * v;
            hxy -= v * std::log2(v);
            hxy1 -= v * std::log2(pxpy);
            maxp = std::max(maxp, v);
            sumsq += v * (a - ux) * (a - ux);
        }
    }
    double da = 0, dent = 0, idm = 0, idmn = 0, id = 0, idn = 0, invvar = 0;
    for (int k = 0; k < n; ++k) {
        const double v = pdiff[static_cast<std::size_t>(k)];
        da += k * v;
        dent -= plogp(v);
        idm += v / (1.0 + k * k);
        idmn += v / (1.0 + static_cast<double>(k) * k / (static_cast<double>(ng) * ng));
        id += v / (1.0 + k);
        idn += v / (1.0 + static_cast<double>(k) / ng);
        if (k > 0) invvar += v / (static_cast<double>(k) * k);
    }
    double dvar = 0;
    for (int k = 0; k < n; ++k) dvar += (k - da) * (k - da) * pdiff[static_cast<std::size_t>(k)];
    double savg = 0, sent = 0;
    for (int k = 2; k <= 2 * n; ++k) {
        savg += k * psum[static_cast<std::size_t>(k)];
        sent -= plogp(psum[static_cast<std::size_t>(k)]);
    }

    const double sd = std::sqrt(sx2 * sy2);
    const double correlation = sd > 0.0 ? (autocorr - ux * uy) / sd : 1.0;
    const double hmax = std::max(hx, hy);
    const double imc1 = hmax > 0.0 ? (hxy - hxy1) / hmax : 0.0;
    const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));

    // MCC: Q = D^-1 P D^-1 P^T shares its eigenvalues with S^2, S = D^-1/2 P D^-1/2 (P symmetric).
    double mcc = 1.0;
    std::vector<int> present;
    for (int i = 0; i < n; ++i)
        if (px[static_cast<std::size_t>(i)] > 0.0) present.push_back(i);
    if (present.size() >= 2) {
        const auto m = static_cast<Eigen::Index>(present.size());
        Eigen::MatrixXd s(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) {
                const int i = present[static_cast<std::size_t>(a)], j = present[static_cast<std::size_t>(b)];
                s(a, b) = 0.5 * (P(i, j) + P(j, i)) /
                          std::sqrt(px[static_cast<std::size_t>(i)] * px[static_cast<std::size_t>(j)]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
        std::vector<double> sq(static_cast<std::size_t>(m));
        for (Eigen::Index k = 0; k < m; ++k) sq[static_cast<std::size_t>(k)] = es.eigenvalues()(k) * es.eigenvalues()(k);
        std::sort(sq.begin(), sq.end(), std::greater<>());
        mcc = std::sqrt(std::max(0.0, sq[1]));
    }

    f = {autocorr, ux,     prominence, shade, tendency, contrast, correlation, da,   dent,  dvar,    energy, hxy,
         imc1,     imc2,   idm,        idmn,  id,       idn,      invvar,      maxp, savg,  sent,    sumsq,  mcc};
    return f;
}

std::array<double, 24> glcm_features(const Glcm& m, int ng) {
    std::array<double, 24> acc{};
    int used = 0;
    for (const auto& c : m.per_direction) {
        if (c.sum() <= 0.0) continue;
        const auto f = glcm_features(c, ng);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f[k];
        ++used;
    }
    if (used == 0) throw DegenerateTextureError("glcm: no direction has voxel pairs");
    for (auto& v : acc) v /= used;
    return acc;
}

namespace {

// Shared emphasis/non-uniformity statistics of run, zone and dependence matrices.
// Rows are gray levels (i = row + 1), columns sizes (j = col + 1).
struct SizeStats {
    double total = 0, small = 0, large = 0, gln = 0, sn = 0, glv = 0, sv = 0, entropy = 0, low = 0, high = 0,
           small_low = 0, small_high = 0, large_low = 0, large_high = 0;
};

SizeStats size_stats(const CountMatrix& m) {
    SizeStats s;
    s.total = m.sum();
    if (s.total <= 0.0) return s;
    std::vector<double> row(static_cast<std::size_t>(m.rows), 0.0), col(static_cast<std::size_t>(m.cols), 0.0);
    double mu_i = 0, mu_j = 0;
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            const double v = m(r, c);
            if (v == 0.0) continue;
            const double i = r + 1, j = c + 1;
            row[static_cast<std::size_t>(r)] += v;
            col[static_cast<std::size_t>(c)] += v;
            s.small += v / (j * j);
            s.large += v * j * j;
            s.low += v / (i * i);
            s.high += v * i * i;
            s.small_low += v / (i * i * j * j);
            s.small_high += v * i * i / (j * j);
            s.large_low += v * j * j / (i * i);
            s.large_high += v * i * i * j * j;
            const double p = v / s.total;
            mu_i += p * i;
            mu_j += p * j;
            s.entropy -= p * std::log2(p);
        }
    }
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            const double v = m(r, c);
            if (v == 0.0) continue;
            const double p = v / s.total;
            s.glv += p * (r + 1 - mu_i) * (r + 1 - mu_i);
            s.sv += p * (c + 1 - mu_j) * (c + 1 - mu_j);
        }
    }
    for (double v : row) s.gln += v * v;
    for (double v : col) s.sn += v * v;
    for (double* v : {&s.small, &s.large, &s.low, &s.high, &s.small_low, &s.small_high, &s.large_low,
                      &s.large_high, &s.gln, &s.sn}) {
        *v /= s.total;
    }
    return s;
}

}  // namespace

std::array<double, 16> glrlm_features(const CountMatrix& runs, std::size_t voxel_count) {
    const SizeStats s = size_stats(runs);
    if (s.total <= 0.0) throw DegenerateTextureError("glrlm: no runs");
    return {s.small,     s.large,      s.gln,       s.gln / s.total, s.sn,        s.sn / s.total,
            s.total / static_cast<double>(voxel_count), s.glv,  s.sv,        s.entropy,   s.low,
            s.high,      s.small_low,  s.small_high, s.large_low,     s.large_high};
}

std::array<double, 16> glrlm_features(const Glrlm& m) {
    std::array<double, 16> acc{};
    int used = 0;
    for (const auto& c : m.per_direction) {
        if (c.sum() <= 0.0) continue;
        const auto f = glrlm_features(c, m.voxel_count);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f[k];
        ++used;
    }
    if (used == 0) throw DegenerateTextureError("glrlm: no runs");
    for (auto& v : acc) v /= used;
    return acc;
}

std::array<double, 16> glszm_features(const Glszm& m) {
    const SizeStats s = size_stats(m.zones);
    if (s.total <= 0.0) throw DegenerateTextureError("glszm: no zones");
    return {s.small,     s.large,      s.gln,       s.gln / s.total, s.sn,        s.sn / s.total,
            s.total / static_cast<double>(m.voxel_count), s.glv, s.sv,        s.entropy,   s.low,
            s.high,      s.small_low,  s.small_high, s.large_low,     s.large_high};
}

std::array<double, 14> gldm_features(const Gldm& m) {
    const SizeStats s = size_stats(m.dependence);
    if (s.total <= 0.0) throw DegenerateTextureError("gldm: empty matrix");
    return {s.small, s.large, s.gln,       s.sn,         s.sn / s.total, s.glv,      s.sv,
            s.entropy, s.low, s.high,      s.small_low,  s.small_high,   s.large_low, s.large_high};
}

std::array<double, 5> ngtdm_features(const Ngtdm& m) {
    const std::size_t ng = m.n.size();
    const double nvp = std::accumulate(m.n.begin(), m.n.end(), 0.0);
    if (nvp <= 0.0) throw DegenerateTextureError("ngtdm: no voxel has a neighbour in the ROI");
    std::vector<double> p(ng);
    int ngp = 0;
    double sum_ps = 0.0, sum_s = 0.0;
    for (std::size_t i = 0; i < ng; ++i) {
        p[i] = m.n[i] / nvp;
        if (p[i] > 0.0) ++ngp;
        sum_ps += p[i] * m.s[i];
        sum_s += m.s[i];
    }
    const double coarseness = sum_ps > 0.0 ? 1.0 / sum_ps : kCoarsenessCap;
    double pair_contrast = 0.0, busy_den = 0.0, complexity = 0.0, strength_num = 0.0;
    for (std::size_t i = 0; i < ng; ++i) {
        if (p[i] == 0.0) continue;
        for (std::size_t j = 0; j < ng; ++j) {
            if (p[j] == 0.0) continue;
            const double a = static_cast<double>(i + 1), b = static_cast<double>(j + 1);
            pair_contrast += p[i] * p[j] * (a - b) * (a - b);
            busy_den += std::abs(a * p[i] - b * p[j]);
            complexity += std::abs(a - b) * (p[i] * m.s[i] + p[j] * m.s[j]) / (p[i] + p[j]);
            strength_num += (p[i] + p[j]) * (a - b) * (a - b);
        }
    }
    const double contrast = ngp > 1 ? pair_contrast / (ngp * (ngp - 1.0)) * sum_s / nvp : 0.0;
    const double busyness = busy_den > 0.0 ? sum_ps / busy_den : 0.0;
    const double strength = sum_s > 0.0 ? strength_num / sum_s : 0.0;
    return {coarseness, contrast, busyness, complexity / nvp, strength};
}

std::array<double, 24> glcm_degenerate_features(int ng) {
    CountMatrix one(1, 1);
    one(0, 0) = 1.0;
    return glcm_features(one, ng);
}

std::array<double, 5> ngtdm_degenerate_features() { return {kCoarsenessCap, 0.0, 0.0, 0.0, 0.0}; }

}  // namespace radiomx
