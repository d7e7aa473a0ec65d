#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "radiomx/extract.hpp"
#include "radiomx/manifest.hpp"

namespace radiomx {

/// Patients x features for one modality, with task labels and cohort per row.
struct FeatureTable {
    Modality modality = Modality::M3D;
    std::vector<std::string> patient_ids;
    std::vector<std::array<std::optional<int>, 3>> labels;  // indexed by Task
    std::vector<Cohort> cohorts;
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    [[nodiscard]] std::size_t rows() const { return patient_ids.size(); }
    [[nodiscard]] std::optional<std::size_t> row_of(const std::string& id) const;
    [[nodiscard]] std::optional<std::size_t> column_of(const std::string& name) const;
};

/// Header: patient_id,modality,label_lnm,label_lvi,label_pt4,cohort,<feature names>.
/// Values use 17 significant digits so they read back bit-exactly.
void write_feature_csv(const FeatureTable& t, const std::filesystem::path& path);
FeatureTable read_feature_csv(const std::filesystem::path& path);

}  // namespace radiomx
