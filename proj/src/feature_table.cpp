#include "radiomx/feature_table.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace radiomx {

std::optional<std::size_t> FeatureTable::row_of(const std::string& id) const {
    for (std::size_t i = 0; i < patient_ids.size(); ++i)
        if (patient_ids[i] == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> FeatureTable::column_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

void write_feature_csv(const FeatureTable& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "patient_id,modality,label_lnm,label_lvi,label_pt4,cohort";
    for (const auto& n : t.names) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < t.rows(); ++i) {
        out << t.patient_ids[i] << ',' << modality_name(t.modality);
        for (const auto& l : t.labels[i]) {
            out << ',';
            if (l) out << *l;
        }
        out << ',' << cohort_name(t.cohorts[i]);
        for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", t.values(static_cast<Eigen::Index>(i), j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<std::string> cells_of(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

FeatureTable read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty feature table");
    const auto header = cells_of(line);
    static const std::array<std::string, 6> fixed{"patient_id", "modality", "label_lnm", "label_lvi", "label_pt4", "cohort"};
    if (header.size() < fixed.size()) throw InvalidArgument(path.string() + ": header too short");
    for (std::size_t k = 0; k < fixed.size(); ++k)
        if (header[k] != fixed[k]) throw InvalidArgument(path.string() + ": expected column '" + fixed[k] + "'");
    FeatureTable t;
    t.names.assign(header.begin() + 6, header.end());
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c = cells_of(line);
        if (c.size() != header.size()) {
            throw InvalidArgument(path.string() + " line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " columns");
        }
        const Modality m = parse_modality(c[1]);
        if (first) t.modality = m;
        else if (m != t.modality) throw InvalidArgument(path.string() + ": mixed modalities");
        first = false;
        t.patient_ids.push_back(c[0]);
        std::array<std::optional<int>, 3> l;
        for (std::size_t k = 0; k < 3; ++k)
            if (!c[2 + k].empty()) l[k] = std::stoi(c[2 + k]);
        t.labels.push_back(l);
        t.cohorts.push_back(parse_cohort(c[5]));
        std::vector<double> v;
        v.reserve(t.names.size());
        for (std::size_t k = 6; k < c.size(); ++k) v.push_back(std::strtod(c[k].c_str(), nullptr));
        rows.push_back(std::move(v));
    }
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return t;
}

}  // namespace radiomx
