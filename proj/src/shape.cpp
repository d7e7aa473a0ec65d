#include "radiomx/shape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace radiomx {

namespace {

using IVec3 = std::array<int, 3>;

// Kuhn triangulation of the unit cube: each tetrahedron walks 0 -> 7 along one axis order.
const std::array<std::array<IVec3, 4>, 6>& kuhn_tetrahedra() {
    static const auto tets = [] {
        std::array<std::array<IVec3, 4>, 6> t{};
        std::array<int, 3> perm{0, 1, 2};
        int k = 0;
        do {
            IVec3 p{0, 0, 0};
            t[static_cast<std::size_t>(k)][0] = p;
            for (int s = 0; s < 3; ++s) {
                p[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] = 1;
                t[static_cast<std::size_t>(k)][static_cast<std::size_t>(s + 1)] = p;
            }
            ++k;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return t;
    }();
    return tets;
}

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

// Eigenvalues (descending) of the covariance of ROI voxel-centre coordinates.
template <int D>
std::array<double, D> axis_eigenvalues(const std::vector<std::array<double, D>>& pts) {
    std::array<double, D> out{};
    if (pts.size() < 2) return out;
    Eigen::Matrix<double, D, 1> mean = Eigen::Matrix<double, D, 1>::Zero();
    for (const auto& p : pts)
        for (int a = 0; a < D; ++a) mean(a) += p[static_cast<std::size_t>(a)];
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix<double, D, D> cov = Eigen::Matrix<double, D, D>::Zero();
    for (const auto& p : pts) {
        Eigen::Matrix<double, D, 1> d;
        for (int a = 0; a < D; ++a) d(a) = p[static_cast<std::size_t>(a)] - mean(a);
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(pts.size() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(cov, Eigen::EigenvaluesOnly);
    for (int a = 0; a < D; ++a) out[static_cast<std::size_t>(a)] = std::max(0.0, es.eigenvalues()(D - 1 - a));
    return out;
}

template <typename P>
double max_diameter(const std::vector<P>& v) {
    double best = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t a = 0; a < v[i].size(); ++a) d2 += (v[i][a] - v[j][a]) * (v[i][a] - v[j][a]);
            best = std::max(best, d2);
        }
    }
    return std::sqrt(best);
}

double ratio_or_one(double num, double den) { return den > 0.0 ? std::sqrt(num / den) : 1.0; }

}  // namespace

namespace {

// Indicator on a grid padded by `pad` voxels, optionally Gaussian-smoothed along the given axes.
struct Field {
    Dims dims;
    int pad;
    std::vector<double> f;
    [[nodiscard]] double at(int x, int y, int z) const {
        return f[(static_cast<std::size_t>(z) * dims[1] + static_cast<std::size_t>(y)) * dims[0] +
                 static_cast<std::size_t>(x)];
    }
};

Field indicator(const RoiMask& mask, bool planar, double sigma) {
    const int z0 = planar ? *mask.slice_index() : 0;
    const int nz = planar ? 1 : mask.dims()[2];
    const int pad = sigma > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma)) + 1 : 1;
    Field g{{mask.dims()[0] + 2 * pad, mask.dims()[1] + 2 * pad, planar ? 1 : nz + 2 * pad}, pad, {}};
    g.f.assign(static_cast<std::size_t>(g.dims[0]) * g.dims[1] * g.dims[2], 0.0);
    const int zoff = planar ? 0 : pad;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < mask.dims()[1]; ++y)
            for (int x = 0; x < mask.dims()[0]; ++x)
                if (mask.at(x, y, z0 + z))
                    g.f[(static_cast<std::size_t>(z + zoff) * g.dims[1] + static_cast<std::size_t>(y + pad)) * g.dims[0] +
                        static_cast<std::size_t>(x + pad)] = 1.0;
    if (sigma <= 0.0) return g;

    const int r = pad - 1;
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double ksum = 0.0;
    for (int i = -r; i <= r; ++i) ksum += k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& w : k) w /= ksum;
    const std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(g.dims[0]),
                                            static_cast<std::size_t>(g.dims[0]) * g.dims[1]};
    for (int axis = 0; axis < (planar ? 2 : 3); ++axis) {
        std::vector<double> out(g.f.size(), 0.0);
        for (int z = 0; z < g.dims[2]; ++z) {
            for (int y = 0; y < g.dims[1]; ++y) {
                for (int x = 0; x < g.dims[0]; ++x) {
                    const std::array<int, 3> p{x, y, z};
                    const std::size_t idx = x * stride[0] + y * stride[1] + z * stride[2];
                    double v = 0.0;
                    for (int i = -r; i <= r; ++i) {
                        const int q = p[static_cast<std::size_t>(axis)] + i;
                        if (q < 0 || q >= g.dims[axis]) continue;
                        v += k[static_cast<std::size_t>(i + r)] *
                             g.f[static_cast<std::size_t>(static_cast<long>(idx) + static_cast<long>(i) *
                                                                                      static_cast<long>(stride[static_cast<std::size_t>(axis)]))];
                    }
                    out[idx] = v;
                }
            }
        }
        g.f = std::move(out);
    }
    return g;
}

constexpr double kIso = 0.5;

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    const Vec3 u = sub(b, a), v = sub(c, a), w = sub(d, a);
    const Vec3 x = cross(v, w);
    return std::abs(u[0] * x[0] + u[1] * x[1] + u[2] * x[2]) / 6.0;
}

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm(cross(sub(b, a), sub(c, a))); }

Mesh3 march_tetrahedra(const Field& g, const Vec3& sp) {
    Mesh3 mesh;
    std::unordered_map<std::uint64_t, Vec3> vertices;
    auto lin = [&](const IVec3& p) {
        return (static_cast<std::uint64_t>(p[2]) * static_cast<std::uint64_t>(g.dims[1]) + static_cast<std::uint64_t>(p[1])) *
                   static_cast<std::uint64_t>(g.dims[0]) + static_cast<std::uint64_t>(p[0]);
    };
    const double cell = sp[0] * sp[1] * sp[2];
    for (int z = 0; z + 1 < g.dims[2]; ++z) {
        for (int y = 0; y + 1 < g.dims[1]; ++y) {
            for (int x = 0; x + 1 < g.dims[0]; ++x) {
                int count = 0;
                for (int c = 0; c < 8; ++c) count += g.at(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1)) >= kIso;
                if (count == 0) continue;
                if (count == 8) {
                    mesh.volume += cell;
                    continue;
                }
                for (const auto& tet : kuhn_tetrahedra()) {
                    std::array<IVec3, 4> v{};
                    std::array<double, 4> f{};
                    std::array<Vec3, 4> p{};
                    std::array<bool, 4> in{};
                    int k = 0;
                    for (std::size_t i = 0; i < 4; ++i) {
                        v[i] = {x + tet[i][0], y + tet[i][1], z + tet[i][2]};
                        f[i] = g.at(v[i][0], v[i][1], v[i][2]);
                        p[i] = {v[i][0] * sp[0], v[i][1] * sp[1], v[i][2] * sp[2]};
                        in[i] = f[i] >= kIso;
                        k += in[i];
                    }
                    if (k == 0) continue;
                    if (k == 4) {
                        mesh.volume += cell / 6.0;
                        continue;
                    }
                    auto cut = [&](std::size_t a, std::size_t b) {
                        const std::uint64_t la = lin(v[a]), lb = lin(v[b]);
                        const double t = (kIso - f[a]) / (f[b] - f[a]);
                        const Vec3 q{p[a][0] + t * (p[b][0] - p[a][0]), p[a][1] + t * (p[b][1] - p[a][1]),
                                     p[a][2] + t * (p[b][2] - p[a][2])};
                        vertices.emplace(std::min(la, lb) << 32 | std::max(la, lb), q);
                        return q;
                    };
                    if (k == 1 || k == 3) {
                        std::size_t odd = 0;
                        for (std::size_t i = 0; i < 4; ++i)
                            if (in[i] == (k == 1)) odd = i;
                        std::array<Vec3, 3> t{};
                        std::size_t n = 0;
                        for (std::size_t i = 0; i < 4; ++i)
                            if (i != odd) t[n++] = cut(odd, i);
                        const double corner = tet_volume(p[odd], t[0], t[1], t[2]);
                        mesh.volume += k == 1 ? corner : cell / 6.0 - corner;
                        mesh.area += tri_area(t[0], t[1], t[2]);
                    } else {
                        std::array<std::size_t, 2> a{}, b{};
                        std::size_t na = 0, nb = 0;
                        for (std::size_t i = 0; i < 4; ++i) (in[i] ? a[na++] : b[nb++]) = i;
                        const Vec3 pac = cut(a[0], b[0]), pad = cut(a[0], b[1]), pbc = cut(a[1], b[0]),
                                   pbd = cut(a[1], b[1]);
                        const Vec3& pa = p[a[0]];
                        mesh.volume += tet_volume(pa, p[a[1]], pbc, pbd) + tet_volume(pa, pac, pbc, pbd) +
                                       tet_volume(pa, pac, pbd, pad);
                        mesh.area += tri_area(pac, pad, pbd) + tri_area(pac, pbd, pbc);
                    }
                }
            }
        }
    }
    mesh.vertices.reserve(vertices.size());
    for (const auto& [key, q] : vertices) mesh.vertices.push_back(q);
    std::sort(mesh.vertices.begin(), mesh.vertices.end());
    return mesh;
}

Mesh2 march_triangles(const Field& g, const Vec3& sp) {
    using IVec2 = std::array<int, 2>;
    static constexpr std::array<std::array<IVec2, 3>, 2> kTriangles{
        {{{{0, 0}, {1, 0}, {1, 1}}}, {{{0, 0}, {0, 1}, {1, 1}}}}};
    Mesh2 mesh;
    const double cell = sp[0] * sp[1];
    auto tri = [](const std::array<double, 2>& a, const std::array<double, 2>& b, const std::array<double, 2>& c) {
        return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
    };
    for (int y = 0; y + 1 < g.dims[1]; ++y) {
        for (int x = 0; x + 1 < g.dims[0]; ++x) {
            int count = 0;
            for (int c = 0; c < 4; ++c) count += g.at(x + (c & 1), y + (c >> 1), 0) >= kIso;
            if (count == 0) continue;
            if (count == 4) {
                mesh.area += cell;
                continue;
            }
            for (const auto& t : kTriangles) {
                std::array<double, 3> f{};
                std::array<std::array<double, 2>, 3> p{};
                std::array<bool, 3> in{};
                int k = 0;
                for (std::size_t i = 0; i < 3; ++i) {
                    const int vx = x + t[i][0], vy = y + t[i][1];
                    f[i] = g.at(vx, vy, 0);
                    p[i] = {vx * sp[0], vy * sp[1]};
                    in[i] = f[i] >= kIso;
                    k += in[i];
                }
                if (k == 0) continue;
                if (k == 3) {
                    mesh.area += 0.5 * cell;
                    continue;
                }
                std::size_t odd = 0;
                for (std::size_t i = 0; i < 3; ++i)
                    if (in[i] == (k == 1)) odd = i;
                std::array<std::array<double, 2>, 2> seg{};
                std::size_t n = 0;
                for (std::size_t i = 0; i < 3; ++i) {
                    if (i == odd) continue;
                    const double s = (kIso - f[odd]) / (f[i] - f[odd]);
                    seg[n++] = {p[odd][0] + s * (p[i][0] - p[odd][0]), p[odd][1] + s * (p[i][1] - p[odd][1])};
                    mesh.vertices.push_back(seg[n - 1]);
                }
                const double corner = tri(p[odd], seg[0], seg[1]);
                mesh.area += k == 1 ? corner : 0.5 * cell - corner;
                mesh.perimeter += std::hypot(seg[0][0] - seg[1][0], seg[0][1] - seg[1][1]);
            }
        }
    }
    std::sort(mesh.vertices.begin(), mesh.vertices.end());
    mesh.vertices.erase(std::unique(mesh.vertices.begin(), mesh.vertices.end()), mesh.vertices.end());
    return mesh;
}

}  // namespace

Mesh3 mesh3(const RoiMask& mask, double sigma) {
    Mesh3 m = march_tetrahedra(indicator(mask, false, sigma), mask.spacing());
    if (sigma > 0.0 && m.volume < 0.5 * mask.geometry().voxel_volume()) return mesh3(mask, 0.0);
    return m;
}

Mesh2 mesh2(const RoiMask& mask, double sigma) {
    if (!mask.is_planar()) throw InvalidArgument("mesh2 needs a planar mask");
    const double pixel = mask.spacing()[0] * mask.spacing()[1];
    Mesh2 m = march_triangles(indicator(mask, true, sigma), mask.spacing());
    if (sigma > 0.0 && m.area < 0.5 * pixel) return mesh2(mask, 0.0);
    return m;
}

std::array<double, 14> shape(const RoiMask& mask) {
    const auto& d = mask.dims();
    const auto& sp = mask.spacing();
    const double pi = std::numbers::pi;
    const auto n = static_cast<double>(mask.count());

    if (mask.is_planar()) {
        const Mesh2 m = mesh2(mask);
        const int z = *mask.slice_index();
        std::vector<std::array<double, 2>> pts;
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x)
                if (mask.at(x, y, z)) pts.push_back({x * sp[0], y * sp[1]});
        const auto ev = axis_eigenvalues<2>(pts);
        const double a = m.area, p = m.perimeter;
        const double major = 4.0 * std::sqrt(ev[0]), minor = 4.0 * std::sqrt(ev[1]);
        const double elong = ratio_or_one(ev[1], ev[0]);
        return {a,
                n * sp[0] * sp[1],
                p,
                p / a,
                2.0 * std::sqrt(pi * a) / p,
                a / (std::sqrt(pi) * p * p),
                4.0 * pi * a / (p * p),
                p / (2.0 * std::sqrt(pi * a)),
                max_diameter(m.vertices),
                major,
                minor,
                minor,
                elong,
                elong};
    }

    const Mesh3 m = mesh3(mask);
    std::vector<Vec3> pts;
    for (int z = 0; z < d[2]; ++z)
        for (int y = 0; y < d[1]; ++y)
            for (int x = 0; x < d[0]; ++x)
                if (mask.at(x, y, z)) pts.push_back({x * sp[0], y * sp[1], z * sp[2]});
    const auto ev = axis_eigenvalues<3>(pts);
    const double v = m.volume, a = m.area;
    return {v,
            n * mask.geometry().voxel_volume(),
            a,
            a / v,
            std::cbrt(36.0 * pi * v * v) / a,
            v / (std::sqrt(pi) * std::pow(a, 1.5)),
            36.0 * pi * v * v / (a * a * a),
            a / std::cbrt(36.0 * pi * v * v),
            max_diameter(m.vertices),
            4.0 * std::sqrt(ev[0]),
            4.0 * std::sqrt(ev[1]),
            4.0 * std::sqrt(ev[2]),
            ratio_or_one(ev[1], ev[0]),
            ratio_or_one(ev[2], ev[0])};
}

}  // namespace radiomx
