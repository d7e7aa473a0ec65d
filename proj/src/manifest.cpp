#include "radiomx/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace radiomx {

std::string_view task_name(Task t) {
    switch (t) {
        case Task::Lnm: return "lnm";
        case Task::Lvi: return "lvi";
        case Task::Pt4: return "pt4";
    }
    return "lnm";
}

Task parse_task(std::string_view name) {
    for (Task t : kAllTasks) {
        if (task_name(t) == name) return t;
    }
    throw InvalidArgument("unknown task '" + std::string(name) + "'");
}

std::string_view cohort_name(Cohort c) {
    switch (c) {
        case Cohort::Training: return "training";
        case Cohort::Validation: return "validation";
        case Cohort::Unassigned: return "unassigned";
    }
    return "unassigned";
}

Cohort parse_cohort(std::string_view name) {
    if (name == "training") return Cohort::Training;
    if (name == "validation") return Cohort::Validation;
    if (name == "unassigned" || name.empty()) return Cohort::Unassigned;
    throw InvalidArgument("unknown cohort '" + std::string(name) + "'");
}

std::vector<const ManifestRow*> CohortManifest::primary_rows() const {
    std::vector<const ManifestRow*> out;
    for (const auto& r : rows) {
        if (r.session == 1) out.push_back(&r);
    }
    return out;
}

const ManifestRow* CohortManifest::find(std::string_view patient_id, int session) const {
    for (const auto& r : rows) {
        if (r.patient_id == patient_id && r.session == session) return &r;
    }
    return nullptr;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<int> parse_label(const std::string& cell, std::size_t line_no) {
    if (cell.empty() || cell == "NA" || cell == "na") return std::nullopt;
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    throw InvalidArgument("manifest line " + std::to_string(line_no) + ": label must be 0, 1 or empty, got '" +
                          cell + "'");
}

}  // namespace

CohortManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("manifest: cannot open " + path.string());
    const auto base = path.parent_path();
    std::string line;
    if (!std::getline(f, line)) throw InvalidArgument("manifest: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader) {
        throw InvalidArgument("manifest: header must be '" + std::string(kManifestHeader) + "'");
    }
    CohortManifest m;
    std::set<std::pair<std::string, int>> seen;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 8) {
            throw InvalidArgument("manifest line " + std::to_string(line_no) + ": expected 8 columns");
        }
        ManifestRow r;
        r.patient_id = cells[0];
        if (r.patient_id.empty()) throw InvalidArgument("manifest line " + std::to_string(line_no) + ": empty id");
        r.volume = cells[1];
        r.mask = cells[2];
        if (r.volume.is_relative()) r.volume = base / r.volume;
        if (r.mask.is_relative()) r.mask = base / r.mask;
        for (std::size_t t = 0; t < 3; ++t) r.labels[t] = parse_label(cells[3 + t], line_no);
        r.cohort = parse_cohort(cells[6]);
        try {
            r.session = std::stoi(cells[7]);
        } catch (const std::exception&) {
            throw InvalidArgument("manifest line " + std::to_string(line_no) + ": bad session '" + cells[7] + "'");
        }
        if (!seen.insert({r.patient_id, r.session}).second) {
            throw InvalidArgument("manifest: duplicate (patient_id, session) = (" + r.patient_id + ", " +
                                  std::to_string(r.session) + ")");
        }
        for (const auto& p : {r.volume, r.mask}) {
            if (!std::filesystem::exists(p)) {
                throw InvalidArgument("manifest line " + std::to_string(line_no) + ": missing file " + p.string());
            }
        }
        m.rows.push_back(std::move(r));
    }
    return m;
}

void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error("manifest: cannot write " + path.string());
    const auto base = path.parent_path();
    auto rel = [&](const std::filesystem::path& p) {
        if (p.is_relative()) return p.generic_string();
        auto r = std::filesystem::relative(p, base.empty() ? std::filesystem::current_path() : base);
        return r.empty() || *r.begin() == ".." ? p.generic_string() : r.generic_string();
    };
    f << kManifestHeader << "\n";
    for (const auto& r : manifest.rows) {
        f << r.patient_id << ',' << rel(r.volume) << ',' << rel(r.mask);
        for (const auto& l : r.labels) {
            f << ',';
            if (l) f << *l;
        }
        f << ',' << cohort_name(r.cohort) << ',' << r.session << "\n";
    }
}

}  // namespace radiomx
