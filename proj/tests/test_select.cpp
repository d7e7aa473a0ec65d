#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "radiomx/select.hpp"
#include "radiomx/stats.hpp"

using namespace radiomx;

namespace {

std::vector<std::string> names_for(int p) {
    std::vector<std::string> n;
    for (int j = 0; j < p; ++j) n.push_back("f" + std::to_string(j + 1));
    return n;
}

std::vector<int> all(int p) {
    std::vector<int> c(static_cast<std::size_t>(p));
    std::iota(c.begin(), c.end(), 0);
    return c;
}

}  // namespace

TEST_CASE("ICC stage") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    const int n = 30;
    Eigen::MatrixXd s1(n, 2), s2(n, 2);
    for (int i = 0; i < n; ++i) {
        s1(i, 0) = nd(rng);
        s2(i, 0) = s1(i, 0);
        s1(i, 1) = nd(rng);
        s2(i, 1) = nd(rng);
    }
    std::vector<int> surv;
    const StageReport r = stage_icc(s1, s2, names_for(2), all(2), SelectionConfig{}, surv);
    CHECK(surv == std::vector<int>{0});
    CHECK(r.entries.size() == 2);
}

TEST_CASE("ICC threshold is strict") {
    // Pick a pair whose ICC is exactly representable by construction, then use it as threshold.
    Eigen::MatrixXd s1(4, 1), s2(4, 1);
    s1 << 1, 2, 3, 4;
    s2 << 1, 3, 2, 4;
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
    SelectionConfig cfg;
    cfg.icc_threshold = icc_a1(a, b);
    std::vector<int> surv;
    stage_icc(s1, s2, names_for(1), all(1), cfg, surv);
    CHECK(surv.empty());
}

TEST_CASE("U-test stage") {
    const int n = 10;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
        x(i, 0) = y[static_cast<std::size_t>(i)];
        x(i, 1) = 5.0;
        x(i, 2) = (i * 7) % 5;
    }
    std::vector<double> p;
    std::vector<int> surv;
    stage_utest(x, y, names_for(3), all(3), SelectionConfig{}, p, surv);
    CHECK(surv == std::vector<int>{0});
    CHECK(p[1] == 1.0);
}

TEST_CASE("U-test stage on null features keeps about 5%") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    const int n = 60, p = 400;
    Eigen::MatrixXd x(n, p);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
        for (int j = 0; j < p; ++j) x(i, j) = nd(rng);
    }
    std::vector<double> pv;
    std::vector<int> surv;
    stage_utest(x, y, names_for(p), all(p), SelectionConfig{}, pv, surv);
    CHECK(surv.size() < 45);
}

TEST_CASE("decorrelation") {
    Eigen::MatrixXd x(6, 3);
    x << 1, 1, 0, 2, 2, 1, 3, 3, 0, 4, 4, 1, 5, 5, 0, 6, 6, 1;
    std::vector<int> surv;
    stage_decorrelate(x, {0.02, 0.01, 0.03}, names_for(3), all(3), SelectionConfig{}, surv);
    CHECK(std::find(surv.begin(), surv.end(), 1) != surv.end());
    CHECK(std::find(surv.begin(), surv.end(), 0) == surv.end());

    Eigen::MatrixXd o(4, 2);
    o << 1, 1, -1, 1, 1, -1, -1, -1;
    stage_decorrelate(o, {0.01, 0.01}, names_for(2), all(2), SelectionConfig{}, surv);
    CHECK(surv.size() == 2);
}

TEST_CASE("equal frequency bins") {
    Eigen::VectorXd v(8);
    v << 8, 1, 7, 2, 6, 3, 5, 4;
    CHECK(equal_frequency_bins(v) == std::vector<int>{3, 0, 3, 0, 2, 1, 2, 1});
}

TEST_CASE("mRMR picks the label copy, then the noise") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    const int n = 40;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
        y[static_cast<std::size_t>(i)] = i % 2;
        x(i, 0) = y[static_cast<std::size_t>(i)] + 0.01 * nd(rng);
        x(i, 1) = x(i, 0);
        x(i, 2) = nd(rng);
    }
    const auto trace = mrmr(x, y, names_for(3), all(3), 2);
    REQUIRE(trace.size() == 2);
    CHECK(trace[0].feature == 0);
    CHECK(trace[1].feature == 2);
    CHECK(trace[0].objective == doctest::Approx(mutual_information(equal_frequency_bins(x.col(0)), y)));
}

TEST_CASE("LASSO above lambda_max is all zero") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(30, 5);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 5; ++j) x(i, j) = nd(rng);
        y(i) = x(i, 1) + nd(rng);
    }
    const double lmax = lasso_lambda_max(x, y);
    CHECK(lasso_fit(x, y, lmax * 1.0001).weights.isZero());
    CHECK(!lasso_fit(x, y, lmax * 0.9).weights.isZero());
}

TEST_CASE("LASSO at lambda 0 equals least squares") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd x(50, 4);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 4; ++j) x(i, j) = nd(rng);
        y(i) = 2 * x(i, 0) - x(i, 2) + 0.5 + 0.1 * nd(rng);
    }
    const LassoFit f = lasso_fit(x, y, 0.0);
    Eigen::MatrixXd a(50, 5);
    a << x, Eigen::VectorXd::Ones(50);
    const Eigen::VectorXd ls = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(f.weights(j) - ls(j)) <= 1e-6);
    CHECK(std::abs(f.intercept - ls(4)) <= 1e-6);
    CHECK(f.converged);
}

TEST_CASE("lambda ratios") {
    const auto r = default_lambda_ratios();
    CHECK(r.size() == 30);
    CHECK(r.front() == 1.0);
    CHECK(r.back() == doctest::Approx(1e-3));
    CHECK(std::is_sorted(r.rbegin(), r.rend()));
}

namespace {

struct Planted {
    Eigen::MatrixXd x, s1, s2;
    std::vector<int> y;
};

Planted planted(std::uint64_t seed, bool permute) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int n = 80, p = 40, r = 20;
    Planted d;
    d.x.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.y[static_cast<std::size_t>(i)] = i % 2;
        const double latent = nd(rng) + 1.5 * d.y[static_cast<std::size_t>(i)];
        for (int j = 0; j < p; ++j) d.x(i, j) = j < 3 ? latent + 0.3 * nd(rng) * (j + 1) : nd(rng);
    }
    if (permute) std::shuffle(d.y.begin(), d.y.end(), rng);
    d.s1 = d.x.topRows(r);
    d.s2 = d.s1 + 0.05 * Eigen::MatrixXd::NullaryExpr(r, p, [&] { return nd(rng); });
    return d;
}

}  // namespace

TEST_CASE("run_selection finds a planted feature and stages nest") {
    const Planted d = planted(6, false);
    SelectionConfig cfg;
    cfg.seed = 1;
    const SelectionReport r = run_selection(d.x, d.y, names_for(40), d.s1, d.s2, cfg);
    REQUIRE(!r.empty());
    bool planted_hit = false;
    for (const auto& f : r.selected) planted_hit = planted_hit || f == "f1" || f == "f2" || f == "f3";
    CHECK(planted_hit);
    const auto all_names = names_for(40);
    std::set<std::string> prev(all_names.begin(), all_names.end());
    for (const auto& s : r.stages) {
        for (const auto& f : s.survivors) CHECK(prev.count(f) == 1);
        prev = std::set<std::string>(s.survivors.begin(), s.survivors.end());
    }
    for (const auto& f : r.selected) CHECK(prev.count(f) == 1);
    CHECK(r.coefficients.size() == r.selected.size());

    const SelectionReport back = selection_from_json(to_json(r));
    CHECK(back.selected == r.selected);
    CHECK(back.coefficients == r.coefficients);
    CHECK(back.lambda == r.lambda);
}

TEST_CASE("run_selection respects the feature cap") {
    const Planted d = planted(7, false);
    SelectionConfig cfg;
    cfg.max_final_features = 1;
    const SelectionReport r = run_selection(d.x, d.y, names_for(40), d.s1, d.s2, cfg);
    CHECK(r.selected.size() <= 1);
}

TEST_CASE("run_selection on permuted labels is empty or uninformative") {
    double gap = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Planted d = planted(100 + s, true);
        SelectionConfig cfg;
        cfg.seed = s;
        const SelectionReport r = run_selection(d.x, d.y, names_for(40), d.s1, d.s2, cfg);
        if (r.empty()) {
            CHECK(r.empty_stage.has_value());
            continue;
        }
        // score a fresh null cohort with the selected weights
        const Planted fresh = planted(500 + s, true);
        std::vector<double> score(fresh.y.size(), 0.0);
        for (std::size_t k = 0; k < r.selected.size(); ++k) {
            const int j = std::stoi(r.selected[k].substr(1)) - 1;
            for (std::size_t i = 0; i < score.size(); ++i)
                score[i] += r.coefficients[k] * fresh.x(static_cast<Eigen::Index>(i), j);
        }
        gap += std::abs(auc(score, fresh.y) - 0.5);
    }
    CHECK(gap / 10.0 < 0.15);
}

TEST_CASE("invalid selection config") {
    SelectionConfig c;
    c.icc_threshold = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = SelectionConfig{};
    c.max_final_features = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}
