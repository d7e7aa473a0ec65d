#include "radiomx/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "radiomx/catalog.hpp"
#include "radiomx/feature_table.hpp"
#include "radiomx/learn.hpp"
#include "radiomx/nrrd.hpp"
#include "radiomx/roi.hpp"
#include "radiomx/stats.hpp"

namespace radiomx {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw InvalidArgument("split_ratio must lie in (0, 1)");
    if (tasks.empty()) throw InvalidArgument("no tasks configured");
    if (modalities.empty()) throw InvalidArgument("no modalities configured");
    for (Modality m : modalities) {
        const auto it = spacing.find(m);
        if (it == spacing.end() || !(it->second > 0.0)) {
            throw InvalidArgument("missing or non-positive spacing for modality " + std::string(modality_name(m)));
        }
    }
    if (aux.spacings.empty()) throw InvalidArgument("aux.spacings is empty");
    for (double s : aux.spacings)
        if (!(s > 0.0)) throw InvalidArgument("aux.spacings must be positive");
    if (aux.repartitions < 2) throw InvalidArgument("aux.repartitions must be at least 2");
    if (aux.max_final_features < 1) throw InvalidArgument("aux.max_final_features must be at least 1");
    if (bootstrap < 100) throw InvalidArgument("bootstrap must be at least 100");
    if (bin_count < 2) throw InvalidArgument("bin_count must be at least 2");
    selection.validate();
}

std::uint64_t ExperimentConfig::effective_split_seed() const { return split_seed ? *split_seed : derive_seed(seed, 1); }

void to_json(json& j, const ExperimentConfig& c) {
    json sp;
    for (const auto& [m, s] : c.spacing) sp[std::string(modality_name(m))] = s;
    std::vector<std::string> tasks, mods;
    for (Task t : c.tasks) tasks.emplace_back(task_name(t));
    for (Modality m : c.modalities) mods.emplace_back(modality_name(m));
    j = {{"cohort", c.cohort.generic_string()},
         {"tasks", tasks},
         {"modalities", mods},
         {"split_ratio", c.split_ratio},
         {"split_seed", c.split_seed ? json(*c.split_seed) : json(nullptr)},
         {"stratify_split", c.stratify_split},
         {"spacing", sp},
         {"aux",
          {{"spacings", c.aux.spacings},
           {"repartitions", c.aux.repartitions},
           {"max_final_features", c.aux.max_final_features}}},
         {"seed", c.seed},
         {"bootstrap", c.bootstrap},
         {"bin_count", c.bin_count},
         {"permute_labels", c.permute_labels},
         {"selection",
          {{"icc_threshold", c.selection.icc_threshold},
           {"p_threshold", c.selection.p_threshold},
           {"corr_threshold", c.selection.corr_threshold},
           {"mrmr_k", c.selection.mrmr_k},
           {"lambda_ratios", c.selection.lambda_ratios},
           {"max_final_features",
            c.selection.max_final_features ? json(*c.selection.max_final_features) : json(nullptr)},
           {"cv_folds", c.selection.cv_folds}}}};
}

void from_json(const json& j, ExperimentConfig& c) {
    auto opt = [](const json& o, const char* key, auto& field) {
        if (o.contains(key) && !o.at(key).is_null()) o.at(key).get_to(field);
    };
    if (j.contains("cohort")) c.cohort = j.at("cohort").get<std::string>();
    if (j.contains("tasks")) {
        c.tasks.clear();
        for (const auto& t : j.at("tasks")) c.tasks.push_back(parse_task(t.get<std::string>()));
    }
    if (j.contains("modalities")) {
        c.modalities.clear();
        for (const auto& m : j.at("modalities")) c.modalities.push_back(parse_modality(m.get<std::string>()));
    }
    opt(j, "split_ratio", c.split_ratio);
    if (j.contains("split_seed") && !j.at("split_seed").is_null()) c.split_seed = j.at("split_seed").get<std::uint64_t>();
    opt(j, "stratify_split", c.stratify_split);
    if (j.contains("spacing")) {
        for (const auto& [k, v] : j.at("spacing").items()) c.spacing[parse_modality(k)] = v.get<double>();
    }
    if (j.contains("aux")) {
        const auto& a = j.at("aux");
        opt(a, "spacings", c.aux.spacings);
        opt(a, "repartitions", c.aux.repartitions);
        opt(a, "max_final_features", c.aux.max_final_features);
    }
    opt(j, "seed", c.seed);
    opt(j, "bootstrap", c.bootstrap);
    opt(j, "bin_count", c.bin_count);
    opt(j, "permute_labels", c.permute_labels);
    if (j.contains("selection")) {
        const auto& s = j.at("selection");
        opt(s, "icc_threshold", c.selection.icc_threshold);
        opt(s, "p_threshold", c.selection.p_threshold);
        opt(s, "corr_threshold", c.selection.corr_threshold);
        opt(s, "mrmr_k", c.selection.mrmr_k);
        opt(s, "lambda_ratios", c.selection.lambda_ratios);
        if (s.contains("max_final_features") && !s.at("max_final_features").is_null()) {
            c.selection.max_final_features = s.at("max_final_features").get<int>();
        }
        opt(s, "cv_folds", c.selection.cv_folds);
    }
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    ExperimentConfig c = json::parse(in).get<ExperimentConfig>();
    if (!c.cohort.empty() && c.cohort.is_relative()) c.cohort = path.parent_path() / c.cohort;
    return c;
}

ExtractedCohort extract_cohort(const CohortManifest& manifest, Modality modality, double spacing,
                               const ExtractConfig& config) {
    ExtractedCohort out;
    const auto primary = manifest.primary_rows();
    out.values.resize(static_cast<Eigen::Index>(primary.size()), static_cast<Eigen::Index>(kCatalogSize));
    std::vector<const ManifestRow*> repeats;
    for (const auto* r : primary) {
        const ImageVolume v = read_nrrd(r->volume);
        const RoiMask m = read_mask_nrrd(r->mask);
        const FeatureVector fv = extract_roi(v, m, modality, spacing, config);
        const auto row = static_cast<Eigen::Index>(out.ids.size());
        out.values.row(row) = Eigen::Map<const Eigen::RowVectorXd>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size()));
        out.ids.push_back(r->patient_id);
        out.seconds.push_back(fv.extraction_seconds);
        out.mask_slices.push_back(static_cast<int>(mask_slices(m).size()));
        if (const auto* rep = manifest.find(r->patient_id, 2)) repeats.push_back(rep);
    }
    out.repeat_values.resize(static_cast<Eigen::Index>(repeats.size()), static_cast<Eigen::Index>(kCatalogSize));
    for (const auto* r : repeats) {
        const FeatureVector fv = extract_roi(read_nrrd(r->volume), read_mask_nrrd(r->mask), modality, spacing, config);
        const auto row = static_cast<Eigen::Index>(out.repeat_ids.size());
        out.repeat_values.row(row) =
            Eigen::Map<const Eigen::RowVectorXd>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size()));
        out.repeat_ids.push_back(r->patient_id);
    }
    return out;
}

const ExtractedCohort& ExtractionCache::get(const fs::path& manifest_path, const CohortManifest& manifest,
                                            Modality modality, double spacing, const ExtractConfig& config) {
    std::ostringstream key;
    key.precision(17);
    key << fs::absolute(manifest_path).lexically_normal().generic_string() << '|' << modality_slug(modality) << '|'
        << spacing << '|' << config.bin_count;
    auto it = entries_.find(key.str());
    if (it == entries_.end()) it = entries_.emplace(key.str(), extract_cohort(manifest, modality, spacing, config)).first;
    return it->second;
}

std::vector<Cohort> split_patients(std::size_t n, double ratio, std::uint64_t seed, const std::vector<int>* strata) {
    std::vector<Cohort> out(n, Cohort::Validation);
    Rng rng(seed);
    auto assign = [&](std::vector<std::size_t> idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < k && i < idx.size(); ++i) out[idx[i]] = Cohort::Training;
    };
    if (strata) {
        std::map<int, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < n; ++i) groups[(*strata)[i]].push_back(i);
        for (auto& [k, idx] : groups) assign(idx);
    } else {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        assign(idx);
    }
    return out;
}

std::string cell_name(Task t, Modality m) { return std::string(task_name(t)) + "_" + std::string(modality_slug(m)); }

namespace {

std::uint64_t cell_stream(Task t, Modality m) {
    return static_cast<std::uint64_t>(static_cast<int>(t) * 3 + static_cast<int>(m));
}

fs::path features_path(const fs::path& dir, Modality m, const char* suffix = "") {
    return dir / ("features_" + std::string(modality_slug(m)) + suffix + ".csv");
}
fs::path timing_path(const fs::path& dir, Modality m) {
    return dir / ("features_" + std::string(modality_slug(m)) + "_timing.json");
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string() + " (run the previous stage first)");
    return json::parse(in);
}

struct CohortLabels {
    std::vector<std::string> ids;
    std::vector<std::array<std::optional<int>, 3>> labels;
    std::vector<Cohort> cohorts;
};

CohortLabels cohort_labels(const ExperimentConfig& config, const CohortManifest& manifest) {
    CohortLabels c;
    const auto primary = manifest.primary_rows();
    bool assigned = !primary.empty();
    for (const auto* r : primary) {
        c.ids.push_back(r->patient_id);
        c.labels.push_back(r->labels);
        c.cohorts.push_back(r->cohort);
        assigned = assigned && r->cohort != Cohort::Unassigned;
    }
    if (config.permute_labels) {
        for (std::size_t t = 0; t < 3; ++t) {
            std::vector<std::optional<int>> col;
            for (const auto& l : c.labels) col.push_back(l[t]);
            Rng rng(derive_seed(config.seed, 100 + t));
            std::shuffle(col.begin(), col.end(), rng);
            for (std::size_t i = 0; i < col.size(); ++i) c.labels[i][t] = col[i];
        }
    }
    if (!assigned) {
        std::vector<int> strata;
        if (config.stratify_split) {
            const auto t = static_cast<std::size_t>(config.tasks.front());
            for (const auto& l : c.labels) strata.push_back(l[t].value_or(-1));
        }
        c.cohorts = split_patients(c.ids.size(), config.split_ratio, config.effective_split_seed(),
                                   config.stratify_split ? &strata : nullptr);
    }
    return c;
}

// Training rows of a table that carry a label for `t`.
struct TaskRows {
    std::vector<Eigen::Index> rows;
    std::vector<int> labels;
};

TaskRows rows_for(const FeatureTable& table, Task t, Cohort cohort) {
    TaskRows r;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto& l = table.labels[i][static_cast<std::size_t>(t)];
        if (table.cohorts[i] != cohort || !l) continue;
        r.rows.push_back(static_cast<Eigen::Index>(i));
        r.labels.push_back(*l);
    }
    return r;
}

// Session-1 and session-2 rows for repeat patients in `allowed`.
void repeat_pairs(const FeatureTable& main, const FeatureTable& repeat, const std::vector<Eigen::Index>& allowed,
                  Eigen::MatrixXd& s1, Eigen::MatrixXd& s2) {
    std::vector<Eigen::Index> a, b;
    for (std::size_t k = 0; k < repeat.rows(); ++k) {
        const auto row = main.row_of(repeat.patient_ids[k]);
        if (!row) continue;
        if (std::find(allowed.begin(), allowed.end(), static_cast<Eigen::Index>(*row)) == allowed.end()) continue;
        a.push_back(static_cast<Eigen::Index>(*row));
        b.push_back(static_cast<Eigen::Index>(k));
    }
    s1 = main.values(a, Eigen::all);
    s2 = repeat.values(b, Eigen::all);
}

std::vector<Eigen::Index> columns_of(const FeatureTable& t, const std::vector<std::string>& names) {
    std::vector<Eigen::Index> cols;
    for (const auto& n : names) {
        const auto c = t.column_of(n);
        if (!c) throw InvalidArgument("feature table lacks column " + n);
        cols.push_back(static_cast<Eigen::Index>(*c));
    }
    return cols;
}

}  // namespace

void cmd_extract(const ExperimentConfig& config, const fs::path& out_dir, ExtractionCache* cache) {
    config.validate();
    fs::create_directories(out_dir);
    const CohortManifest manifest = load_manifest(config.cohort);
    const CohortLabels cl = cohort_labels(config, manifest);
    ExtractConfig ec;
    ec.bin_count = config.bin_count;
    for (Modality m : config.modalities) {
        const double spacing = config.spacing.at(m);
        std::cerr << "extract " << modality_name(m) << " at " << spacing << " mm\n";
        ExtractedCohort local;
        const ExtractedCohort& ext =
            cache ? cache->get(config.cohort, manifest, m, spacing, ec) : (local = extract_cohort(manifest, m, spacing, ec));

        FeatureTable main{m, ext.ids, cl.labels, cl.cohorts, feature_names(), ext.values};
        write_feature_csv(main, features_path(out_dir, m));

        FeatureTable rep{m, ext.repeat_ids, {}, {}, feature_names(), ext.repeat_values};
        for (const auto& id : ext.repeat_ids) {
            const auto i = static_cast<std::size_t>(std::find(cl.ids.begin(), cl.ids.end(), id) - cl.ids.begin());
            rep.labels.push_back(cl.labels[i]);
            rep.cohorts.push_back(cl.cohorts[i]);
        }
        write_feature_csv(rep, features_path(out_dir, m, "_repeat"));
        write_json(timing_path(out_dir, m), {{"modality", modality_name(m)},
                                             {"spacing_mm", spacing},
                                             {"patient_id", ext.ids},
                                             {"seconds", ext.seconds},
                                             {"mask_slices", ext.mask_slices}});
    }
}

void cmd_select(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    for (Modality m : config.modalities) {
        const FeatureTable table = read_feature_csv(features_path(out_dir, m));
        const FeatureTable repeat = read_feature_csv(features_path(out_dir, m, "_repeat"));
        for (Task t : config.tasks) {
            const TaskRows tr = rows_for(table, t, Cohort::Training);
            Eigen::MatrixXd s1, s2;
            repeat_pairs(table, repeat, tr.rows, s1, s2);
            SelectionConfig sc = config.selection;
            sc.seed = derive_seed(config.seed, 10 + cell_stream(t, m));
            const SelectionReport rep = run_selection(table.values(tr.rows, Eigen::all), tr.labels, table.names, s1, s2, sc);
            const std::string cell = cell_name(t, m);
            write_json(out_dir / ("selection_" + cell + ".json"), to_json(rep));
            write_selection_csv(rep, out_dir / ("selection_" + cell + ".csv"));
            std::cerr << "select " << cell << ": " << rep.selected.size() << " features\n";
        }
    }
}

void cmd_train(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    for (Modality m : config.modalities) {
        const FeatureTable table = read_feature_csv(features_path(out_dir, m));
        for (Task t : config.tasks) {
            const std::string cell = cell_name(t, m);
            const SelectionReport sel = selection_from_json(read_json(out_dir / ("selection_" + cell + ".json")));
            json out;
            if (sel.selected.empty()) {
                out = {{"empty", true}, {"features", json::array()}};
            } else {
                const TaskRows tr = rows_for(table, t, Cohort::Training);
                const Eigen::MatrixXd raw = table.values(tr.rows, columns_of(table, sel.selected));
                const ZScoreParams zp = zscore_fit(raw);
                const Eigen::MatrixXd z = zscore_apply(zp, raw);
                auto grid = default_grid(ModelKind::Logistic, static_cast<int>(z.cols()));
                const auto svm = default_grid(ModelKind::SvmRbf, static_cast<int>(z.cols()));
                grid.insert(grid.end(), svm.begin(), svm.end());
                const GridSearchResult gs = grid_search_cv(z, tr.labels, grid, 5, derive_seed(config.seed, 20 + cell_stream(t, m)));
                ModelArtifact model = fit_model(z, tr.labels, gs.chosen);
                model.features = sel.selected;
                model.feature_mean = zp.mean;
                model.feature_sd = zp.sd;
                model.cv_table = gs.table;
                out = to_json(model);
                out["empty"] = false;
            }
            write_json(out_dir / ("model_" + cell + ".json"), out);
        }
    }
}

namespace {

json auc_block(const Eigen::VectorXd& scores, const std::vector<int>& labels, int bootstrap, std::uint64_t seed,
               RocResult* roc_out) {
    const std::span<const double> s(scores.data(), static_cast<std::size_t>(scores.size()));
    const RocResult r = roc(s, labels);
    const auto ci = bootstrap_auc_ci(s, labels, bootstrap, seed);
    if (roc_out) *roc_out = r;
    return {{"auc", r.auc}, {"ci", {ci.first, ci.second}}, {"n", labels.size()}};
}

}  // namespace

json cmd_eval(const ExperimentConfig& config, const fs::path& out_dir) {
    config.validate();
    json report;
    report["config"] = config;
    report["cells"] = json::array();
    json timing = json::object();
    std::optional<FeatureTable> any_table;
    for (Modality m : config.modalities) {
        const FeatureTable table = read_feature_csv(features_path(out_dir, m));
        const json tj = read_json(timing_path(out_dir, m));
        const auto secs = tj.at("seconds").get<std::vector<double>>();
        const double mean_seconds = secs.empty() ? 0.0 : std::accumulate(secs.begin(), secs.end(), 0.0) / secs.size();
        timing[std::string(modality_name(m))] = mean_seconds;
        for (Task t : config.tasks) {
            const std::string cell = cell_name(t, m);
            const json mj = read_json(out_dir / ("model_" + cell + ".json"));
            const TaskRows tr = rows_for(table, t, Cohort::Training);
            const TaskRows va = rows_for(table, t, Cohort::Validation);
            json c{{"task", task_name(t)}, {"modality", modality_name(m)}, {"mean_extraction_seconds", mean_seconds}};
            if (mj.at("empty").get<bool>()) {
                c["empty_selection"] = true;
                c["features"] = json::array();
                c["model_kind"] = nullptr;
                c["training"] = {{"auc", 0.5}, {"ci", {0.5, 0.5}}, {"n", tr.labels.size()}};
                c["validation"] = {{"auc", 0.5}, {"ci", {0.5, 0.5}}, {"n", va.labels.size()}};
            } else {
                const ModelArtifact model = model_from_json(mj);
                const auto cols = columns_of(table, model.features);
                const std::uint64_t s = derive_seed(config.seed, 30 + cell_stream(t, m));
                RocResult vroc;
                c["empty_selection"] = false;
                c["features"] = model.features;
                c["model_kind"] = model_kind_name(model.kind);
                c["hyperparameters"] = mj.at("hyperparameters");
                c["training"] = auc_block(score(model, table.values(tr.rows, cols)), tr.labels, config.bootstrap,
                                          derive_seed(s, 0), nullptr);
                c["validation"] = auc_block(score(model, table.values(va.rows, cols)), va.labels, config.bootstrap,
                                            derive_seed(s, 1), &vroc);
                write_roc_csv(vroc, out_dir / ("roc_" + cell + ".csv"));
            }
            report["cells"].push_back(c);
        }
        if (!any_table) any_table = table;
    }
    report["mean_extraction_seconds"] = timing;
    json balance = json::array();
    for (Task t : config.tasks) {
        const TaskRows tr = rows_for(*any_table, t, Cohort::Training);
        const TaskRows va = rows_for(*any_table, t, Cohort::Validation);
        const double tp = std::accumulate(tr.labels.begin(), tr.labels.end(), 0.0);
        const double vp = std::accumulate(va.labels.begin(), va.labels.end(), 0.0);
        balance.push_back({{"task", task_name(t)},
                           {"training_positive", tp},
                           {"training_n", tr.labels.size()},
                           {"validation_positive", vp},
                           {"validation_n", va.labels.size()},
                           {"chi_square_p", chi_square_2x2(tp, static_cast<double>(tr.labels.size()) - tp, vp,
                                                           static_cast<double>(va.labels.size()) - vp)}});
    }
    report["balance"] = balance;
    write_json(out_dir / "report.json", report);
    return report;
}

json cmd_main_experiment(const ExperimentConfig& config, const fs::path& out_dir, ExtractionCache* cache) {
    cmd_extract(config, out_dir, cache);
    cmd_select(config, out_dir);
    cmd_train(config, out_dir);
    return cmd_eval(config, out_dir);
}

json cmd_auxiliary(const ExperimentConfig& config, const fs::path& out_dir, ExtractionCache* cache) {
    config.validate();
    fs::create_directories(out_dir);
    const CohortManifest manifest = load_manifest(config.cohort);
    const CohortLabels cl = cohort_labels(config, manifest);
    ExtractConfig ec;
    ec.bin_count = config.bin_count;
    ExtractionCache local_cache;
    ExtractionCache& ch = cache ? *cache : local_cache;
    const std::size_t n = cl.ids.size();
    const int reps = config.aux.repartitions;

    std::vector<std::vector<Cohort>> splits;
    for (int r = 0; r < reps; ++r) {
        splits.push_back(split_patients(n, config.split_ratio, derive_seed(config.effective_split_seed(), 1000 + static_cast<std::uint64_t>(r))));
    }

    // samples[task][spacing][modality] -> AUC per repartition
    std::map<std::tuple<int, std::size_t, int>, std::vector<double>> samples;
    std::ofstream csv(out_dir / "aux_auc_samples.csv");
    if (!csv) throw Error("cannot write aux_auc_samples.csv");
    csv.precision(17);
    csv << "task,spacing_mm,modality,repartition,auc,n_features,empty_selection\n";
    json timing = json::array();
    for (std::size_t si = 0; si < config.aux.spacings.size(); ++si) {
        const double spacing = config.aux.spacings[si];
        for (Modality m : config.modalities) {
            std::cerr << "aux " << modality_name(m) << " at " << spacing << " mm\n";
            const ExtractedCohort& ext = ch.get(config.cohort, manifest, m, spacing, ec);
            timing.push_back({{"spacing_mm", spacing},
                              {"modality", modality_name(m)},
                              {"mean_seconds", std::accumulate(ext.seconds.begin(), ext.seconds.end(), 0.0) / ext.seconds.size()}});
            std::vector<std::size_t> rep_row;  // primary row of each repeat ROI
            for (const auto& id : ext.repeat_ids)
                rep_row.push_back(static_cast<std::size_t>(std::find(ext.ids.begin(), ext.ids.end(), id) - ext.ids.begin()));
            for (int r = 0; r < reps; ++r) {
                const auto& split = splits[static_cast<std::size_t>(r)];
                for (Task t : config.tasks) {
                    const auto ti = static_cast<std::size_t>(t);
                    std::vector<Eigen::Index> tr, va;
                    std::vector<int> ytr, yva;
                    for (std::size_t i = 0; i < n; ++i) {
                        const auto& l = cl.labels[i][ti];
                        if (!l) continue;
                        (split[i] == Cohort::Training ? tr : va).push_back(static_cast<Eigen::Index>(i));
                        (split[i] == Cohort::Training ? ytr : yva).push_back(*l);
                    }
                    std::vector<Eigen::Index> a, b;
                    for (std::size_t k = 0; k < rep_row.size(); ++k) {
                        if (split[rep_row[k]] != Cohort::Training || !cl.labels[rep_row[k]][ti]) continue;
                        a.push_back(static_cast<Eigen::Index>(rep_row[k]));
                        b.push_back(static_cast<Eigen::Index>(k));
                    }
                    SelectionConfig sc = config.selection;
                    sc.max_final_features = config.aux.max_final_features;
                    sc.seed = derive_seed(config.seed, 5000 + static_cast<std::uint64_t>(r) * 16 + ti);
                    const SelectionReport sel = run_selection(ext.values(tr, Eigen::all), ytr, feature_names(),
                                                              ext.values(a, Eigen::all), ext.repeat_values(b, Eigen::all), sc);
                    double value = 0.5;
                    if (!sel.selected.empty()) {
                        std::vector<Eigen::Index> cols;
                        for (const auto& name : sel.selected)
                            cols.push_back(static_cast<Eigen::Index>(
                                std::find(feature_names().begin(), feature_names().end(), name) - feature_names().begin()));
                        const Eigen::MatrixXd raw = ext.values(tr, cols);
                        const ZScoreParams zp = zscore_fit(raw);
                        const LogisticModel lm = logistic_fit(zscore_apply(zp, raw), ytr);
                        const Eigen::VectorXd s = predict_proba(lm, zscore_apply(zp, ext.values(va, cols)));
                        value = auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), yva);
                    }
                    samples[{static_cast<int>(t), si, static_cast<int>(m)}].push_back(value);
                    csv << task_name(t) << ',' << spacing << ',' << modality_name(m) << ',' << r << ',' << value << ','
                        << sel.selected.size() << ',' << (sel.selected.empty() ? 1 : 0) << '\n';
                }
            }
        }
    }

    json report;
    report["config"] = config;
    report["timing"] = timing;
    report["cells"] = json::array();
    report["comparisons"] = json::array();
    for (Task t : config.tasks) {
        for (std::size_t si = 0; si < config.aux.spacings.size(); ++si) {
            for (Modality m : config.modalities) {
                auto v = samples[{static_cast<int>(t), si, static_cast<int>(m)}];
                std::sort(v.begin(), v.end());
                const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
                double var = 0.0;
                for (double x : v) var += (x - mean) * (x - mean);
                const auto q = [&](double p) {
                    const double pos = p * (v.size() - 1);
                    const auto lo = static_cast<std::size_t>(pos);
                    const std::size_t hi = std::min(lo + 1, v.size() - 1);
                    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
                };
                report["cells"].push_back({{"task", task_name(t)},
                                           {"spacing_mm", config.aux.spacings[si]},
                                           {"modality", modality_name(m)},
                                           {"samples", v.size()},
                                           {"mean", mean},
                                           {"sd", std::sqrt(var / std::max<std::size_t>(1, v.size() - 1))},
                                           {"q25", q(0.25)},
                                           {"median", q(0.5)},
                                           {"q75", q(0.75)}});
            }
            const auto k2 = std::make_tuple(static_cast<int>(t), si, static_cast<int>(Modality::M2D));
            const auto k3 = std::make_tuple(static_cast<int>(t), si, static_cast<int>(Modality::M3D));
            if (samples.count(k2) && samples.count(k3)) {
                const UTestResult u = mann_whitney(samples[k2], samples[k3]);
                report["comparisons"].push_back({{"task", task_name(t)},
                                                 {"spacing_mm", config.aux.spacings[si]},
                                                 {"u", u.u},
                                                 {"p", u.p}});
            }
        }
    }
    write_json(out_dir / "aux_report.json", report);
    return report;
}

}  // namespace radiomx
