#include <unistd.h>

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "radiomx/manifest.hpp"
#include "radiomx/nrrd.hpp"
#include "radiomx/phantom.hpp"
#include "radiomx/stats.hpp"

using namespace radiomx;

namespace {

double latent_auc(const PhantomSpec& spec, int task) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < spec.n_patients; ++i) {
        const PhantomPatient p = make_patient(spec, i);
        s.push_back(p.latent[static_cast<std::size_t>(task)]);
        y.push_back(p.labels[static_cast<std::size_t>(task)]);
    }
    return auc(s, y);
}

}  // namespace

TEST_CASE("patients are deterministic per seed and index") {
    PhantomSpec spec;
    const PhantomPatient a = make_patient(spec, 3), b = make_patient(spec, 3);
    CHECK(a.volume.voxels() == b.volume.voxels());
    CHECK(a.mask.voxels() == b.mask.voxels());
    CHECK(a.labels == b.labels);
    spec.seed = 2;
    CHECK(make_patient(spec, 3).volume.voxels() != a.volume.voxels());
}

TEST_CASE("generated cohort is bit-identical for the same seed") {
    testutil::TempDir d1("ph"), d2("ph");
    PhantomSpec spec;
    spec.n_patients = 20;
    generate(spec, d1.path);
    generate(spec, d2.path);
    for (const auto& e : std::filesystem::recursive_directory_iterator(d1.path)) {
        if (!e.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(e.path(), d1.path);
        std::ifstream a(e.path(), std::ios::binary), b(d2.path / rel, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK_MESSAGE(sa.str() == sb.str(), rel.string());
    }
    const CohortManifest m = load_manifest(d1.path / "manifest.csv");
    CHECK(m.primary_rows().size() == 20);
    int repeats = 0;
    for (const auto* r : m.primary_rows()) {
        if (const auto* s2 = m.find(r->patient_id, 2)) {
            ++repeats;
            const double dc = dice(read_mask_nrrd(r->mask), read_mask_nrrd(s2->mask));
            CHECK(dc > 0.7);
            CHECK(dc < 1.0);
        }
    }
    std::ifstream oc(d1.path / "oracle.csv");
    std::string line;
    std::getline(oc, line);
    int flagged = 0;
    while (std::getline(oc, line))
        if (!line.empty() && line.back() == '1') ++flagged;
    CHECK(repeats == flagged);
    CHECK(repeats > 0);
}

TEST_CASE("planted signal strength controls the latent AUC") {
    PhantomSpec spec;
    spec.n_patients = 200;
    spec.signal = {0.0, 0.5, 1.0};
    const double none = latent_auc(spec, 0), half = latent_auc(spec, 1), full = latent_auc(spec, 2);
    CHECK(none >= 0.4);
    CHECK(none <= 0.6);
    CHECK(full > 0.9);
    CHECK(none < half);
    CHECK(half < full);
}

TEST_CASE("oracle_auc reads the sidecar") {
    testutil::TempDir d("ph");
    PhantomSpec spec;
    spec.n_patients = 40;
    generate(spec, d.path);
    const auto a = oracle_auc(d.path);
    const auto rows = read_oracle(d.path / "oracle.csv");
    std::vector<double> s;
    std::vector<int> y;
    for (const auto& r : rows) {
        s.push_back(r.latent[0]);
        y.push_back(r.labels[0]);
    }
    CHECK(a[0] == auc(s, y));
    CHECK(oracle_auc(d.path) == a);
    CHECK_THROWS(oracle_auc(d.path / "missing"));
}

TEST_CASE("phantom spec validation and JSON") {
    PhantomSpec s;
    s.signal = {1.5, 0, 0};
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    PhantomSpec t;
    t.n_patients = 77;
    t.thickness_pool = {2.0};
    const PhantomSpec back = nlohmann::json(t).get<PhantomSpec>();
    CHECK(back.n_patients == 77);
    CHECK(back.thickness_pool == std::vector<double>{2.0});
}
