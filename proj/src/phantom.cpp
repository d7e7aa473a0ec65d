#include "radiomx/phantom.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "radiomx/manifest.hpp"
#include "radiomx/nrrd.hpp"
#include "radiomx/stats.hpp"

namespace radiomx {

void PhantomSpec::validate() const {
    if (n_patients < 20) throw InvalidArgument("phantom: n_patients must be at least 20");
    if (!(inplane_spacing > 0.0)) throw InvalidArgument("phantom: in-plane spacing must be positive");
    if (thickness_pool.empty()) throw InvalidArgument("phantom: thickness pool is empty");
    for (double t : thickness_pool)
        if (!(t > 0.0)) throw InvalidArgument("phantom: slice thickness must be positive");
    for (double s : signal)
        if (s < 0.0 || s > 1.0) throw InvalidArgument("phantom: signal strengths must lie in [0, 1]");
    auto range = [](const std::array<double, 2>& r, const char* what) {
        if (!(r[0] > 0.0) || r[1] < r[0]) throw InvalidArgument(std::string("phantom: bad range for ") + what);
    };
    range(semi_axis_mm, "semi_axis_mm");
    range(corr_length_mm, "corr_length_mm");
    range(amplitude_hu, "amplitude_hu");
    if (repeat_fraction < 0.0 || repeat_fraction > 1.0) throw InvalidArgument("phantom: repeat_fraction must lie in [0, 1]");
    if (morph_probability < 0.0 || morph_probability > 1.0) throw InvalidArgument("phantom: morph_probability must lie in [0, 1]");
    if (margin_slices < 3) throw InvalidArgument("phantom: margin_slices must be at least 3");
    const double lesion_voxels = semi_axis_mm[1] / inplane_spacing;
    if (grid < 2 * (lesion_voxels + 8.0)) throw InvalidArgument("phantom: grid too small for the largest lesion");
}

void to_json(nlohmann::json& j, const PhantomSpec& s) {
    j = {{"n_patients", s.n_patients},         {"seed", s.seed},
         {"inplane_spacing", s.inplane_spacing}, {"thickness_pool", s.thickness_pool},
         {"grid", s.grid},                     {"semi_axis_mm", s.semi_axis_mm},
         {"corr_length_mm", s.corr_length_mm}, {"amplitude_hu", s.amplitude_hu},
         {"background_hu", s.background_hu},   {"lesion_hu", s.lesion_hu},
         {"noise_hu", s.noise_hu},             {"signal", s.signal},
         {"repeat_fraction", s.repeat_fraction}, {"morph_probability", s.morph_probability},
         {"margin_slices", s.margin_slices}};
}

void from_json(const nlohmann::json& j, PhantomSpec& s) {
    auto opt = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    opt("n_patients", s.n_patients);
    opt("seed", s.seed);
    opt("inplane_spacing", s.inplane_spacing);
    opt("thickness_pool", s.thickness_pool);
    opt("grid", s.grid);
    opt("semi_axis_mm", s.semi_axis_mm);
    opt("corr_length_mm", s.corr_length_mm);
    opt("amplitude_hu", s.amplitude_hu);
    opt("background_hu", s.background_hu);
    opt("lesion_hu", s.lesion_hu);
    opt("noise_hu", s.noise_hu);
    opt("signal", s.signal);
    opt("repeat_fraction", s.repeat_fraction);
    opt("morph_probability", s.morph_probability);
    opt("margin_slices", s.margin_slices);
}

namespace {

// Separable Gaussian blur with per-axis sigma in voxels, zero padding.
void blur(std::vector<double>& f, const Dims& d, const std::array<double, 3>& sigma) {
    std::array<std::size_t, 3> stride{1, static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[0]) * d[1]};
    std::vector<double> out(f.size());
    for (int axis = 0; axis < 3; ++axis) {
        const double s = sigma[static_cast<std::size_t>(axis)];
        if (s <= 0.0) continue;
        const int r = static_cast<int>(std::ceil(3.0 * s));
        std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
        for (int i = -r; i <= r; ++i) k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (s * s));
        const int n = d[axis];
        for (int z = 0; z < d[2]; ++z) {
            for (int y = 0; y < d[1]; ++y) {
                for (int x = 0; x < d[0]; ++x) {
                    const std::array<int, 3> p{x, y, z};
                    const int c = p[static_cast<std::size_t>(axis)];
                    const std::size_t base = x * stride[0] + y * stride[1] + z * stride[2] - c * stride[static_cast<std::size_t>(axis)];
                    double v = 0.0;
                    for (int i = std::max(-r, -c); i <= std::min(r, n - 1 - c); ++i) {
                        v += k[static_cast<std::size_t>(i + r)] * f[base + static_cast<std::size_t>(c + i) * stride[static_cast<std::size_t>(axis)]];
                    }
                    out[base + static_cast<std::size_t>(c) * stride[static_cast<std::size_t>(axis)]] = v;
                }
            }
        }
        f.swap(out);
    }
}

RoiMask morph(const RoiMask& m, double p, Rng& rng) {
    const auto& g = m.geometry();
    const auto& d = g.dims;
    std::bernoulli_distribution flip(p);
    std::vector<std::uint8_t> out = m.voxels();
    static constexpr std::array<std::array<int, 3>, 6> nb{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x) {
                const bool in = m.at(x, y, z);
                bool edge = false;
                for (const auto& o : nb) {
                    const int a = x + o[0], b = y + o[1], c = z + o[2];
                    const bool other = g.contains(a, b, c) && m.at(a, b, c);
                    if (other != in) edge = true;
                }
                if (edge && flip(rng)) out[g.index(x, y, z)] = in ? 0 : 1;
            }
        }
    }
    return RoiMask(g, std::move(out));
}

std::string patient_id(int index) {
    std::ostringstream s;
    s << "P" << std::setw(4) << std::setfill('0') << index;
    return s.str();
}

}  // namespace

PhantomPatient make_patient(const PhantomSpec& spec, int index) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto lerp = [](const std::array<double, 2>& r, double t) { return r[0] + t * (r[1] - r[0]); };

    PhantomPatient p;
    p.id = patient_id(index);
    p.theta1 = unit(rng);
    p.theta2 = unit(rng);
    p.latent = {p.theta1, p.theta2, 0.5 * (p.theta1 + p.theta2)};
    for (std::size_t t = 0; t < 3; ++t) {
        const double u = unit(rng);
        const double s = spec.signal[t];
        p.labels[t] = s * (p.latent[t] - 0.5) + (1.0 - s) * (u - 0.5) > 0.0 ? 1 : 0;
    }
    p.corr_length_mm = lerp(spec.corr_length_mm, p.theta1);
    p.amplitude_hu = lerp(spec.amplitude_hu, p.theta2);
    std::uniform_int_distribution<std::size_t> pick(0, spec.thickness_pool.size() - 1);
    p.thickness_mm = spec.thickness_pool[pick(rng)];

    const double a = lerp(spec.semi_axis_mm, unit(rng));
    const double b = lerp(spec.semi_axis_mm, unit(rng));
    const double c = lerp(spec.semi_axis_mm, unit(rng));
    const double angle = std::numbers::pi * unit(rng);
    const double jx = 4.0 * (2.0 * unit(rng) - 1.0), jy = 4.0 * (2.0 * unit(rng) - 1.0);
    const bool repeat = unit(rng) < spec.repeat_fraction;

    const double t = p.thickness_mm, sp = spec.inplane_spacing;
    const int nz = static_cast<int>(std::ceil(2.0 * c / t)) + 2 * spec.margin_slices;
    Geometry g{{spec.grid, spec.grid, nz}, {sp, sp, t}, {0.0, 0.0, 0.0}};
    const double cx = (0.5 * (spec.grid - 1) + jx) * sp, cy = (0.5 * (spec.grid - 1) + jy) * sp;
    const double cz = 0.5 * (nz - 1) * t;

    std::vector<double> field(g.voxel_count());
    for (auto& v : field) v = normal(rng);
    blur(field, g.dims, {p.corr_length_mm / sp, p.corr_length_mm / sp, p.corr_length_mm / t});
    double ss = 0.0;
    for (double v : field) ss += v * v;
    const double scale = 1.0 / std::sqrt(ss / static_cast<double>(field.size()));

    std::vector<double> vox(g.voxel_count());
    std::vector<std::uint8_t> mask(g.voxel_count(), 0);
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < spec.grid; ++y) {
            for (int x = 0; x < spec.grid; ++x) {
                const std::size_t i = g.index(x, y, z);
                const double dx = x * sp - cx, dy = y * sp - cy, dz = z * t - cz;
                const double u = ca * dx + sa * dy, w = -sa * dx + ca * dy;
                const bool in = (u * u) / (a * a) + (w * w) / (b * b) + (dz * dz) / (c * c) <= 1.0;
                mask[i] = in ? 1 : 0;
                const double noise = spec.noise_hu * normal(rng);
                const double hu = in ? spec.lesion_hu + p.amplitude_hu * scale * field[i] + noise : spec.background_hu + noise;
                vox[i] = std::round(std::clamp(hu, -32768.0, 32767.0));
            }
        }
    }
    p.volume = ImageVolume(g, std::move(vox));
    p.mask = RoiMask(g, std::move(mask));
    if (repeat) p.repeat_mask = morph(p.mask, spec.morph_probability, rng);
    return p;
}

std::filesystem::path generate(const PhantomSpec& spec, const std::filesystem::path& out) {
    spec.validate();
    namespace fs = std::filesystem;
    const fs::path out_dir = fs::absolute(out);
    fs::create_directories(out_dir / "cohort");
    CohortManifest manifest;
    std::ofstream oracle(out_dir / "oracle.csv");
    if (!oracle) throw Error("cannot write " + (out_dir / "oracle.csv").string());
    oracle.precision(17);
    oracle << "patient_id,latent_lnm,latent_lvi,latent_pt4,label_lnm,label_lvi,label_pt4,theta1,theta2,"
              "corr_length_mm,amplitude_hu,thickness_mm,repeat\n";
    for (int i = 0; i < spec.n_patients; ++i) {
        const PhantomPatient p = make_patient(spec, i);
        const fs::path img = out_dir / "cohort" / (p.id + "_img.nrrd");
        const fs::path m1 = out_dir / "cohort" / (p.id + "_mask_s1.nrrd");
        write_nrrd(p.volume, img, NrrdType::Int16);
        write_nrrd(p.mask, m1);
        ManifestRow row{p.id, img, m1, {p.labels[0], p.labels[1], p.labels[2]}, Cohort::Unassigned, 1};
        manifest.rows.push_back(row);
        if (p.repeat_mask) {
            const fs::path m2 = out_dir / "cohort" / (p.id + "_mask_s2.nrrd");
            write_nrrd(*p.repeat_mask, m2);
            row.mask = m2;
            row.session = 2;
            manifest.rows.push_back(row);
        }
        oracle << p.id << ',' << p.latent[0] << ',' << p.latent[1] << ',' << p.latent[2] << ',' << p.labels[0] << ','
               << p.labels[1] << ',' << p.labels[2] << ',' << p.theta1 << ',' << p.theta2 << ',' << p.corr_length_mm
               << ',' << p.amplitude_hu << ',' << p.thickness_mm << ',' << (p.repeat_mask ? 1 : 0) << '\n';
    }
    const fs::path manifest_path = out_dir / "manifest.csv";
    write_manifest(manifest, manifest_path);
    std::ofstream(out_dir / "phantom_spec.json") << nlohmann::json(spec).dump(2) << '\n';
    return manifest_path;
}

std::vector<OracleRow> read_oracle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing oracle sidecar: " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<OracleRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 7) throw Error("malformed oracle row: " + line);
        OracleRow r;
        r.patient_id = cells[0];
        for (std::size_t t = 0; t < 3; ++t) {
            r.latent[t] = std::stod(cells[1 + t]);
            r.labels[t] = std::stoi(cells[4 + t]);
        }
        rows.push_back(r);
    }
    return rows;
}

std::array<double, 3> oracle_auc(const std::filesystem::path& cohort_dir) {
    const auto rows = read_oracle(cohort_dir / "oracle.csv");
    std::array<double, 3> out{};
    for (std::size_t t = 0; t < 3; ++t) {
        std::vector<double> s;
        std::vector<int> l;
        for (const auto& r : rows) {
            s.push_back(r.latent[t]);
            l.push_back(r.labels[t]);
        }
        out[t] = auc(s, l);
    }
    return out;
}

double dice(const RoiMask& a, const RoiMask& b) {
    if (a.geometry().dims != b.geometry().dims) throw InvalidArgument("dice: grids differ");
    std::size_t both = 0;
    for (std::size_t i = 0; i < a.voxels().size(); ++i) both += a.voxels()[i] && b.voxels()[i];
    return 2.0 * static_cast<double>(both) / static_cast<double>(a.count() + b.count());
}

}  // namespace radiomx
