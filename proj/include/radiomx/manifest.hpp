#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radiomx/volume.hpp"

namespace radiomx {

enum class Task { Lnm, Lvi, Pt4 };
inline constexpr std::array<Task, 3> kAllTasks{Task::Lnm, Task::Lvi, Task::Pt4};

std::string_view task_name(Task t);  // "lnm", "lvi", "pt4"
Task parse_task(std::string_view name);

enum class Cohort { Training, Validation, Unassigned };

std::string_view cohort_name(Cohort c);  // "training", "validation", "unassigned"
Cohort parse_cohort(std::string_view name);

struct ManifestRow {
    std::string patient_id;
    std::filesystem::path volume;
    std::filesystem::path mask;
    std::array<std::optional<int>, 3> labels;  // indexed by Task; empty when not recorded
    Cohort cohort = Cohort::Unassigned;
    int session = 1;

    [[nodiscard]] std::optional<int> label(Task t) const { return labels[static_cast<std::size_t>(t)]; }
};

struct CohortManifest {
    std::vector<ManifestRow> rows;

    /// Session-1 rows in file order.
    [[nodiscard]] std::vector<const ManifestRow*> primary_rows() const;
    [[nodiscard]] const ManifestRow* find(std::string_view patient_id, int session) const;
};

inline constexpr std::string_view kManifestHeader =
    "patient_id,volume,mask,label_lnm,label_lvi,label_pt4,cohort,session";

/// Relative paths are resolved against the manifest's directory. Rejects duplicate
/// (patient_id, session) pairs and paths that do not exist.
CohortManifest load_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest directory when they live below it.
void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

}  // namespace radiomx
