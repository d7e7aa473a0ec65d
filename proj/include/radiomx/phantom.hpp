#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radiomx/volume.hpp"

namespace radiomx {

struct PhantomSpec {
    int n_patients = 200;
    std::uint64_t seed = 1;
    double inplane_spacing = 0.8;                 // mm
    std::vector<double> thickness_pool{1.25, 5.0};  // mm
    int grid = 64;                                // in-plane voxels per side
    std::array<double, 2> semi_axis_mm{8.0, 13.0};
    std::array<double, 2> corr_length_mm{1.0, 4.0};  // driven by latent theta1
    std::array<double, 2> amplitude_hu{15.0, 45.0};  // driven by latent theta2
    double background_hu = 40.0;
    double lesion_hu = 60.0;
    double noise_hu = 5.0;
    std::array<double, 3> signal{1.0, 1.0, 1.0};  // per task (lnm, lvi, pt4), in [0, 1]
    double repeat_fraction = 0.25;
    double morph_probability = 0.3;
    int margin_slices = 4;

    void validate() const;
};

void to_json(nlohmann::json& j, const PhantomSpec& s);
void from_json(const nlohmann::json& j, PhantomSpec& s);

struct PhantomPatient {
    std::string id;
    ImageVolume volume;
    RoiMask mask;
    std::optional<RoiMask> repeat_mask;
    double theta1 = 0.0;
    double theta2 = 0.0;
    std::array<double, 3> latent{};  // generative parameter per task
    std::array<int, 3> labels{};
    double corr_length_mm = 0.0;
    double amplitude_hu = 0.0;
    double thickness_mm = 0.0;
};

/// Patient `index` of the cohort; depends only on (spec, index).
/// Task latents: lnm <- theta1 (correlation length), lvi <- theta2 (amplitude),
/// pt4 <- their mean. label = [s (latent - 0.5) + (1 - s) (u - 0.5) > 0], u ~ U(0, 1).
PhantomPatient make_patient(const PhantomSpec& spec, int index);

/// Writes cohort/<id>_img.nrrd (int16), cohort/<id>_mask_s1.nrrd, cohort/<id>_mask_s2.nrrd for
/// the repeat subset, manifest.csv and oracle.csv under `out_dir`. Returns the manifest path.
std::filesystem::path generate(const PhantomSpec& spec, const std::filesystem::path& out_dir);

struct OracleRow {
    std::string patient_id;
    std::array<double, 3> latent{};
    std::array<int, 3> labels{};
};

std::vector<OracleRow> read_oracle(const std::filesystem::path& path);

/// Per-task AUC of the hidden generative parameter against the label. `cohort_dir` holds
/// oracle.csv. Throws when the sidecar is missing.
std::array<double, 3> oracle_auc(const std::filesystem::path& cohort_dir);

/// Dice overlap of two masks on the same grid.
double dice(const RoiMask& a, const RoiMask& b);

}  // namespace radiomx
