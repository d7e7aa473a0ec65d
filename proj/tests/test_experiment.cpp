#include <unistd.h>

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "radiomx/experiment.hpp"
#include "radiomx/feature_table.hpp"
#include "radiomx/manifest.hpp"
#include "radiomx/nrrd.hpp"
#include "radiomx/phantom.hpp"

using namespace radiomx;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct SmallCohort {
    testutil::TempDir dir{"exp"};
    fs::path manifest;
    SmallCohort() {
        PhantomSpec spec;
        spec.n_patients = 30;
        spec.seed = 5;
        manifest = generate(spec, dir.path / "cohort");
    }
};

ExperimentConfig small_config(const fs::path& manifest) {
    ExperimentConfig c;
    c.cohort = manifest;
    c.bootstrap = 200;
    return c;
}

}  // namespace

TEST_CASE("config JSON round trip and validation") {
    ExperimentConfig c;
    c.cohort = "x/manifest.csv";
    c.tasks = {Task::Lvi};
    c.modalities = {Modality::M3D, Modality::M2D};
    c.split_seed = 99;
    c.aux.repartitions = 7;
    c.selection.max_final_features = 3;
    const ExperimentConfig b = nlohmann::json(c).get<ExperimentConfig>();
    CHECK(b.tasks == c.tasks);
    CHECK(b.modalities == c.modalities);
    CHECK(b.split_seed == c.split_seed);
    CHECK(b.aux.repartitions == 7);
    CHECK(b.selection.max_final_features == 3);
    CHECK(b.spacing == c.spacing);

    ExperimentConfig bad = c;
    bad.split_ratio = 1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = c;
    bad.aux.spacings.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = c;
    bad.aux.repartitions = 1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("split is seeded and follows the ratio") {
    const auto a = split_patients(100, 0.7, 3);
    CHECK(a == split_patients(100, 0.7, 3));
    CHECK(a != split_patients(100, 0.7, 4));
    CHECK(std::count(a.begin(), a.end(), Cohort::Training) == 70);
    std::vector<int> strata(100);
    for (int i = 0; i < 100; ++i) strata[static_cast<std::size_t>(i)] = i < 20;
    const auto s = split_patients(100, 0.7, 3, &strata);
    int pos_train = 0;
    for (int i = 0; i < 20; ++i) pos_train += s[static_cast<std::size_t>(i)] == Cohort::Training;
    CHECK(pos_train == 14);
}

TEST_CASE("staged stages equal the monolithic run") {
    SmallCohort c;
    const ExperimentConfig cfg = small_config(c.manifest);
    const auto mono = cmd_main_experiment(cfg, c.dir.path / "mono");
    cmd_extract(cfg, c.dir.path / "staged");
    cmd_select(cfg, c.dir.path / "staged");
    cmd_train(cfg, c.dir.path / "staged");
    const auto staged = cmd_eval(cfg, c.dir.path / "staged");

    CHECK(mono["cells"].size() == cfg.tasks.size() * cfg.modalities.size());
    for (const auto& e : fs::directory_iterator(c.dir.path / "mono")) {
        const auto name = e.path().filename().string();
        if (name.find("timing") != std::string::npos || name == "report.json") continue;
        CHECK_MESSAGE(slurp(e.path()) == slurp(c.dir.path / "staged" / name), name);
    }
    auto strip = [](nlohmann::json j) {
        j.erase("mean_extraction_seconds");
        for (auto& cell : j["cells"]) cell.erase("mean_extraction_seconds");
        return j;
    };
    CHECK(strip(mono) == strip(staged));

    // Re-evaluating the saved models reproduces the stored AUCs.
    const auto again = cmd_eval(cfg, c.dir.path / "mono");
    for (std::size_t k = 0; k < mono["cells"].size(); ++k)
        CHECK(again["cells"][k]["validation"] == mono["cells"][k]["validation"]);

    const FeatureTable t = read_feature_csv(c.dir.path / "mono" / "features_2d.csv");
    CHECK(t.rows() == 30);
    CHECK(t.names.size() == 851);
    for (const auto& cell : mono["cells"])
        CHECK(cell["validation"]["ci"][0].get<double>() <= cell["validation"]["auc"].get<double>());
}

TEST_CASE("validation images never reach selection or training") {
    SmallCohort c;
    ExperimentConfig cfg = small_config(c.manifest);
    cfg.modalities = {Modality::M2D};
    cmd_extract(cfg, c.dir.path / "a");
    cmd_select(cfg, c.dir.path / "a");
    cmd_train(cfg, c.dir.path / "a");

    const FeatureTable t = read_feature_csv(c.dir.path / "a" / "features_2d.csv");
    const CohortManifest m = load_manifest(c.manifest);
    int mutated = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        if (t.cohorts[i] != Cohort::Validation) continue;
        const ManifestRow* r = m.find(t.patient_ids[i], 1);
        ImageVolume v = read_nrrd(r->volume);
        for (auto& x : v.voxels()) x = -x + 17;
        write_nrrd(v, r->volume, NrrdType::Int16);
        ++mutated;
    }
    REQUIRE(mutated > 0);
    cmd_extract(cfg, c.dir.path / "b");
    cmd_select(cfg, c.dir.path / "b");
    cmd_train(cfg, c.dir.path / "b");
    for (const char* task : {"lnm", "lvi", "pt4"}) {
        const std::string sel = std::string("selection_") + task + "_2d.json";
        const std::string mod = std::string("model_") + task + "_2d.json";
        CHECK(slurp(c.dir.path / "a" / sel) == slurp(c.dir.path / "b" / sel));
        CHECK(slurp(c.dir.path / "a" / mod) == slurp(c.dir.path / "b" / mod));
    }
    CHECK(slurp(c.dir.path / "a" / "features_2d.csv") != slurp(c.dir.path / "b" / "features_2d.csv"));
}

TEST_CASE("auxiliary sweep emits R samples per cell and is deterministic") {
    SmallCohort c;
    ExperimentConfig cfg = small_config(c.manifest);
    cfg.aux.spacings = {2.5, 5.0};
    cfg.aux.repartitions = 3;
    ExtractionCache cache;
    const auto r = cmd_auxiliary(cfg, c.dir.path / "aux", &cache);
    CHECK(r["cells"].size() == 3 * 2 * 3);
    for (const auto& cell : r["cells"]) CHECK(cell["samples"] == 3);
    CHECK(r["comparisons"].size() == 3 * 2);
    cmd_auxiliary(cfg, c.dir.path / "aux2");
    CHECK(slurp(c.dir.path / "aux" / "aux_auc_samples.csv") == slurp(c.dir.path / "aux2" / "aux_auc_samples.csv"));
}

TEST_CASE("missing stage input is reported") {
    SmallCohort c;
    const ExperimentConfig cfg = small_config(c.manifest);
    CHECK_THROWS_AS(cmd_select(cfg, c.dir.path / "nothing"), Error);
}
