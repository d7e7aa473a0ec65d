#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "radiomx/extract.hpp"
#include "radiomx/manifest.hpp"
#include "radiomx/select.hpp"

namespace radiomx {

struct AuxConfig {
    std::vector<double> spacings{1.25, 2.00, 2.50, 3.00, 5.00};
    int repartitions = 50;
    int max_final_features = 4;
};

struct ExperimentConfig {
    std::filesystem::path cohort;  // manifest.csv
    std::vector<Task> tasks{kAllTasks.begin(), kAllTasks.end()};
    std::vector<Modality> modalities{kAllModalities.begin(), kAllModalities.end()};
    double split_ratio = 0.7;
    std::optional<std::uint64_t> split_seed;  // defaults to a stream of `seed`
    bool stratify_split = false;
    std::map<Modality, double> spacing{{Modality::M2D, 1.25}, {Modality::M2_5D, 1.25}, {Modality::M3D, 2.50}};
    AuxConfig aux;
    std::uint64_t seed = 7;
    int bootstrap = 1000;
    int bin_count = 32;
    bool permute_labels = false;
    SelectionConfig selection;

    void validate() const;
    [[nodiscard]] std::uint64_t effective_split_seed() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
/// Relative cohort paths resolve against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Features of every session-1 ROI plus the session-2 (repeat) ROIs, one modality and spacing.
struct ExtractedCohort {
    std::vector<std::string> ids;
    Eigen::MatrixXd values;
    std::vector<double> seconds;
    std::vector<int> mask_slices;  // ROI-bearing slices of the native 3D mask
    std::vector<std::string> repeat_ids;
    Eigen::MatrixXd repeat_values;
};

ExtractedCohort extract_cohort(const CohortManifest& manifest, Modality modality, double spacing,
                               const ExtractConfig& config);

/// Memoizes extract_cohort per (manifest path, modality, spacing, bin count) within a process.
class ExtractionCache {
public:
    const ExtractedCohort& get(const std::filesystem::path& manifest_path, const CohortManifest& manifest,
                               Modality modality, double spacing, const ExtractConfig& config);

private:
    std::map<std::string, ExtractedCohort> entries_;
};

/// Seeded patient-level split; round(ratio * n) patients go to training. With `stratify`
/// the split is done per label value of `strata`.
std::vector<Cohort> split_patients(std::size_t n, double ratio, std::uint64_t seed,
                                   const std::vector<int>* strata = nullptr);

// Stage commands. Each reads its inputs from and writes its outputs to `out_dir`:
// extract -> features_<m>.csv, features_<m>_repeat.csv, features_<m>_timing.json
// select  -> selection_<task>_<m>.json / .csv
// train   -> model_<task>_<m>.json
// eval    -> roc_<task>_<m>.csv, report.json
void cmd_extract(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                 ExtractionCache* cache = nullptr);
void cmd_select(const ExperimentConfig& config, const std::filesystem::path& out_dir);
void cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir);
nlohmann::json cmd_eval(const ExperimentConfig& config, const std::filesystem::path& out_dir);
/// extract, select, train and eval in sequence.
nlohmann::json cmd_main_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                   ExtractionCache* cache = nullptr);
/// Spacing sweep with repeated random splits; writes aux_auc_samples.csv and aux_report.json.
nlohmann::json cmd_auxiliary(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                             ExtractionCache* cache = nullptr);

std::string cell_name(Task t, Modality m);  // e.g. "lnm_2d"

}  // namespace radiomx
