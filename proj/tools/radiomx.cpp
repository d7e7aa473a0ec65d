#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radiomx/experiment.hpp"
#include "radiomx/phantom.hpp"
#include "radiomx/volume.hpp"

namespace fs = std::filesystem;
using namespace radiomx;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string cohort;
    std::vector<std::string> tasks;
    std::vector<std::string> modalities;
    std::optional<int> repartitions;
    std::optional<int> bootstrap;
    std::optional<std::uint64_t> split_seed;
    bool permute = false;
    bool stratify = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "experiment config (JSON)");
    app->add_option("--seed", c.seed, "global seed");
    app->add_option("--out-dir", c.out_dir, "output directory");
    app->add_option("--cohort", c.cohort, "cohort manifest.csv");
    app->add_option("--tasks", c.tasks, "subset of lnm lvi pt4");
    app->add_option("--modalities", c.modalities, "subset of 2D 2.5D 3D");
    app->add_option("--repartitions", c.repartitions, "auxiliary sweep repartitions");
    app->add_option("--bootstrap", c.bootstrap, "bootstrap resamples");
    app->add_option("--split-seed", c.split_seed, "seed of the training/validation split");
    app->add_flag("--permute-labels", c.permute, "shuffle labels (null run)");
    app->add_flag("--stratify", c.stratify, "stratify the split by the first task's label");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.cohort.empty()) cfg.cohort = c.cohort;
    if (!c.tasks.empty()) {
        cfg.tasks.clear();
        for (const auto& t : c.tasks) cfg.tasks.push_back(parse_task(t));
    }
    if (!c.modalities.empty()) {
        cfg.modalities.clear();
        for (const auto& m : c.modalities) cfg.modalities.push_back(parse_modality(m));
    }
    if (c.repartitions) cfg.aux.repartitions = *c.repartitions;
    if (c.bootstrap) cfg.bootstrap = *c.bootstrap;
    if (c.split_seed) cfg.split_seed = *c.split_seed;
    if (c.permute) cfg.permute_labels = true;
    if (c.stratify) cfg.stratify_split = true;
    if (cfg.cohort.empty()) throw InvalidArgument("no cohort given (--cohort or config \"cohort\")");
    cfg.validate();
    return cfg;
}

void print_summary(const nlohmann::json& report) {
    for (const auto& c : report.at("cells")) {
        if (c.contains("validation")) {
            const auto& v = c.at("validation");
            std::printf("%-4s %-5s valid AUC %.3f [%.3f, %.3f]  features %zu\n",
                        c.at("task").get<std::string>().c_str(), c.at("modality").get<std::string>().c_str(),
                        v.at("auc").get<double>(), v.at("ci")[0].get<double>(), v.at("ci")[1].get<double>(),
                        c.at("features").size());
        } else {
            std::printf("%-4s %5.2f mm %-5s mean AUC %.3f (sd %.3f)\n", c.at("task").get<std::string>().c_str(),
                        c.at("spacing_mm").get<double>(), c.at("modality").get<std::string>().c_str(),
                        c.at("mean").get<double>(), c.at("sd").get<double>());
        }
    }
    if (report.contains("comparisons")) {
        for (const auto& p : report.at("comparisons")) {
            std::printf("%-4s %5.2f mm  2D vs 3D  P = %.4g\n", p.at("task").get<std::string>().c_str(),
                        p.at("spacing_mm").get<double>(), p.at("p").get<double>());
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radiomx: radiomics feature extraction and 2D/2.5D/3D comparison experiments"};
    app.require_subcommand(1);

    std::string phantom_config, phantom_out = "phantom";
    std::optional<std::uint64_t> phantom_seed;
    std::optional<int> n_patients;
    std::optional<double> signal;
    auto* phantom = app.add_subcommand("phantom", "generate a synthetic cohort");
    phantom->add_option("--config", phantom_config, "phantom spec (JSON)");
    phantom->add_option("--seed", phantom_seed, "phantom seed");
    phantom->add_option("--out-dir", phantom_out, "output directory");
    phantom->add_option("--n-patients", n_patients, "cohort size");
    phantom->add_option("--signal", signal, "signal strength in [0, 1] for every task");

    Common common;
    auto* extract = app.add_subcommand("extract", "extract feature tables");
    auto* select = app.add_subcommand("select", "run feature selection on extracted tables");
    auto* train = app.add_subcommand("train", "fit models on the selected features");
    auto* eval = app.add_subcommand("eval", "evaluate models and write report.json");
    auto* run = app.add_subcommand("run", "main experiment: extract, select, train, eval");
    auto* aux = app.add_subcommand("aux", "auxiliary spacing sweep");
    for (auto* s : {extract, select, train, eval, run, aux}) add_common(s, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (phantom->parsed()) {
            PhantomSpec spec;
            if (!phantom_config.empty()) {
                std::ifstream in(phantom_config);
                if (!in) throw Error("cannot open " + phantom_config);
                spec = nlohmann::json::parse(in).get<PhantomSpec>();
            }
            if (phantom_seed) spec.seed = *phantom_seed;
            if (n_patients) spec.n_patients = *n_patients;
            if (signal) spec.signal = {*signal, *signal, *signal};
            const fs::path manifest = generate(spec, phantom_out);
            std::cout << manifest.string() << '\n';
            return 0;
        }
        const ExperimentConfig cfg = resolve(common);
        const fs::path out = common.out_dir;
        if (extract->parsed()) cmd_extract(cfg, out);
        if (select->parsed()) cmd_select(cfg, out);
        if (train->parsed()) cmd_train(cfg, out);
        if (eval->parsed()) print_summary(cmd_eval(cfg, out));
        if (run->parsed()) print_summary(cmd_main_experiment(cfg, out));
        if (aux->parsed()) print_summary(cmd_auxiliary(cfg, out));
    } catch (const std::exception& e) {
        std::cerr << "radiomx: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
