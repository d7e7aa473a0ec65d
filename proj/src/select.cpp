#include "radiomx/select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "radiomx/stats.hpp"

namespace radiomx {

std::vector<double> default_lambda_ratios(int count, double smallest) {
    std::vector<double> r;
    for (int i = 0; i < count; ++i) {
        r.push_back(count == 1 ? 1.0 : std::pow(smallest, static_cast<double>(i) / (count - 1)));
    }
    return r;
}

void SelectionConfig::validate() const {
    auto unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!unit(icc_threshold) || !unit(p_threshold) || !unit(corr_threshold)) {
        throw InvalidArgument("selection thresholds must lie in (0, 1)");
    }
    if (mrmr_k < 1) throw InvalidArgument("mrmr_k must be at least 1");
    if (lambda_ratios.empty()) throw InvalidArgument("lambda grid is empty");
    for (double r : lambda_ratios)
        if (!(r > 0.0)) throw InvalidArgument("lambda grid values must be positive");
    if (max_final_features && *max_final_features < 1) throw InvalidArgument("max_final_features must be >= 1");
    if (cv_folds < 2) throw InvalidArgument("cv_folds must be at least 2");
}

namespace {

std::vector<double> column(const Eigen::MatrixXd& x, int j) {
    return {x.col(j).data(), x.col(j).data() + x.rows()};
}

}  // namespace

StageReport stage_icc(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, const std::vector<std::string>& names,
                      const std::vector<int>& candidates, const SelectionConfig& config, std::vector<int>& survivors) {
    StageReport r{"icc", {}, {}, false, {}};
    survivors.clear();
    if (s1.rows() < 3 || s1.rows() != s2.rows()) {
        r.skipped = true;
        r.note = "fewer than three repeat-segmentation pairs; stage skipped";
        survivors = candidates;
        for (int j : candidates) r.survivors.push_back(names[static_cast<std::size_t>(j)]);
        return r;
    }
    for (int j : candidates) {
        const auto a = column(s1, j), b = column(s2, j);
        const double icc = icc_a1(a, b);
        const bool keep = icc > config.icc_threshold;
        r.entries.push_back({names[static_cast<std::size_t>(j)], icc, keep});
        if (keep) {
            survivors.push_back(j);
            r.survivors.push_back(names[static_cast<std::size_t>(j)]);
        }
    }
    return r;
}

StageReport stage_utest(const Eigen::MatrixXd& x, const std::vector<int>& labels, const std::vector<std::string>& names,
                        const std::vector<int>& candidates, const SelectionConfig& config, std::vector<double>& pvalues,
                        std::vector<int>& survivors) {
    StageReport r{"utest", {}, {}, false, {}};
    survivors.clear();
    pvalues.assign(static_cast<std::size_t>(x.cols()), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> pos, neg;
    for (int j : candidates) {
        pos.clear();
        neg.clear();
        for (Eigen::Index i = 0; i < x.rows(); ++i) (labels[static_cast<std::size_t>(i)] == 1 ? pos : neg).push_back(x(i, j));
        const double p = mann_whitney(pos, neg).p;
        pvalues[static_cast<std::size_t>(j)] = p;
        const bool keep = p <= config.p_threshold;
        r.entries.push_back({names[static_cast<std::size_t>(j)], p, keep});
        if (keep) {
            survivors.push_back(j);
            r.survivors.push_back(names[static_cast<std::size_t>(j)]);
        }
    }
    return r;
}

StageReport stage_decorrelate(const Eigen::MatrixXd& x, const std::vector<double>& pvalues,
                              const std::vector<std::string>& names, const std::vector<int>& candidates,
                              const SelectionConfig& config, std::vector<int>& survivors) {
    StageReport r{"decorrelate", {}, {}, false, {}};
    std::vector<int> order = candidates;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pa = pvalues[static_cast<std::size_t>(a)], pb = pvalues[static_cast<std::size_t>(b)];
        if (pa != pb) return pa < pb;
        return names[static_cast<std::size_t>(a)] < names[static_cast<std::size_t>(b)];
    });
    std::vector<int> kept;
    std::vector<std::vector<double>> kept_cols;
    for (int j : order) {
        const auto c = column(x, j);
        double worst = 0.0;
        for (const auto& k : kept_cols) worst = std::max(worst, std::abs(pearson(c, k)));
        const bool keep = worst <= config.corr_threshold;
        r.entries.push_back({names[static_cast<std::size_t>(j)], worst, keep});
        if (keep) {
            kept.push_back(j);
            kept_cols.push_back(c);
        }
    }
    // Survivors are reported in catalog order.
    std::sort(kept.begin(), kept.end());
    survivors = kept;
    for (int j : kept) r.survivors.push_back(names[static_cast<std::size_t>(j)]);
    return r;
}

std::vector<int> equal_frequency_bins(const Eigen::VectorXd& col, int bins) {
    std::vector<double> sorted(col.data(), col.data() + col.size());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();
    std::vector<double> edges;
    for (int k = 1; k < bins; ++k) edges.push_back(sorted[static_cast<std::size_t>(k) * n / static_cast<std::size_t>(bins)]);
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        int b = 0;
        for (double e : edges) b += e <= col(static_cast<Eigen::Index>(i));
        out[i] = b;
    }
    return out;
}

std::vector<MrmrStep> mrmr(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                           const std::vector<std::string>& names, const std::vector<int>& candidates, int k) {
    std::vector<int> pool = candidates;
    std::sort(pool.begin(), pool.end(),
              [&](int a, int b) { return names[static_cast<std::size_t>(a)] < names[static_cast<std::size_t>(b)]; });
    const std::size_t m = pool.size();
    std::vector<std::vector<int>> binned(m);
    std::vector<double> relevance(m);
    for (std::size_t i = 0; i < m; ++i) {
        binned[i] = equal_frequency_bins(x.col(pool[i]));
        relevance[i] = mutual_information(binned[i], labels);
    }
    std::vector<double> redundancy(m, 0.0);
    std::vector<bool> taken(m, false);
    std::vector<MrmrStep> steps;
    const std::size_t want = std::min(m, static_cast<std::size_t>(std::max(k, 0)));
    for (std::size_t step = 0; step < want; ++step) {
        std::size_t best = m;
        double best_obj = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            if (taken[i]) continue;
            const double obj = relevance[i] - (step == 0 ? 0.0 : redundancy[i] / static_cast<double>(step));
            if (obj > best_obj) {
                best_obj = obj;
                best = i;
            }
        }
        taken[best] = true;
        steps.push_back({pool[best], best_obj});
        for (std::size_t i = 0; i < m; ++i)
            if (!taken[i]) redundancy[i] += mutual_information(binned[i], binned[best]);
    }
    return steps;
}

namespace {

constexpr double kLassoTol = 1e-6;
constexpr double kKktTol = 1e-4;
constexpr int kMaxSweeps = 10000;

struct Centred {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Eigen::RowVectorXd xmean;
    double ymean;
};

Centred centre(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Centred c;
    c.xmean = x.colwise().mean();
    c.ymean = y.mean();
    c.x = x.rowwise() - c.xmean;
    c.y = y.array() - c.ymean;
    return c;
}

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

double kkt_centred(const Centred& c, const Eigen::VectorXd& w, double lambda) {
    const Eigen::VectorXd g = -2.0 * c.x.transpose() * (c.y - c.x * w);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w(j) != 0.0) {
            worst = std::max(worst, std::abs(g(j) + lambda * (w(j) > 0 ? 1.0 : -1.0)));
        } else {
            worst = std::max(worst, std::abs(g(j)) - lambda);
        }
    }
    return std::max(0.0, worst);
}

}  // namespace

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Centred c = centre(x, y);
    return (2.0 * c.x.transpose() * c.y).cwiseAbs().maxCoeff();
}

double lasso_kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double lambda) {
    return kkt_centred(centre(x, y), w, lambda);
}

LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const Eigen::VectorXd* warm_start) {
    if (x.rows() != y.size()) throw InvalidArgument("lasso: row count mismatch");
    if (lambda < 0.0) throw InvalidArgument("lasso: lambda must be non-negative");
    const Centred c = centre(x, y);
    const Eigen::Index p = x.cols();
    LassoFit fit;
    fit.lambda = lambda;
    fit.weights = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd sq = c.x.colwise().squaredNorm();
    Eigen::VectorXd r = c.y - c.x * fit.weights;
    for (fit.sweeps = 1; fit.sweeps <= kMaxSweeps; ++fit.sweeps) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double old = fit.weights(j);
            if (sq(j) == 0.0) {
                fit.weights(j) = 0.0;
            } else {
                const double rho = c.x.col(j).dot(r) + sq(j) * old;
                fit.weights(j) = soft(2.0 * rho, lambda) / (2.0 * sq(j));
            }
            const double d = fit.weights(j) - old;
            if (d != 0.0) r -= d * c.x.col(j);
            change = std::max(change, std::abs(d));
        }
        fit.max_change = change;
        if (change < kLassoTol) {
            // Recompute the residual to shed drift before checking optimality.
            r = c.y - c.x * fit.weights;
            fit.kkt = kkt_centred(c, fit.weights, lambda);
            if (fit.kkt <= kKktTol) {
                fit.converged = true;
                break;
            }
        }
    }
    fit.sweeps = std::min(fit.sweeps, kMaxSweeps);
    if (!fit.converged) fit.kkt = kkt_centred(c, fit.weights, lambda);
    fit.intercept = c.ymean - c.xmean.dot(fit.weights);
    return fit;
}

std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& lambdas) {
    std::vector<LassoFit> out;
    const Eigen::VectorXd* warm = nullptr;
    for (double l : lambdas) {
        out.push_back(lasso_fit(x, y, l, warm));
        warm = &out.back().weights;
    }
    return out;
}

namespace {

// Mean fold AUC of the linear LASSO score per grid point.
std::vector<double> lasso_cv_auc(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                 const std::vector<double>& lambdas, int folds, std::uint64_t seed) {
    const auto fold = stratified_folds(labels, folds, seed);
    std::vector<double> mean(lambdas.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> tr, va;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd xt = x(tr, Eigen::all), xv = x(va, Eigen::all);
        Eigen::VectorXd yt(static_cast<Eigen::Index>(tr.size()));
        for (std::size_t i = 0; i < tr.size(); ++i) yt(static_cast<Eigen::Index>(i)) = labels[static_cast<std::size_t>(tr[i])];
        std::vector<int> lv;
        for (auto i : va) lv.push_back(labels[static_cast<std::size_t>(i)]);
        const auto path = lasso_path(xt, yt, lambdas);
        for (std::size_t k = 0; k < path.size(); ++k) {
            const Eigen::VectorXd s = xv * path[k].weights;
            std::vector<double> sv(s.data(), s.data() + s.size());
            mean[k] += auc(sv, lv) / folds;
        }
    }
    return mean;
}

std::size_t count_nonzero(const Eigen::VectorXd& w) {
    return static_cast<std::size_t>((w.array() != 0.0).count());
}

}  // namespace

SelectionReport run_selection(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                              const std::vector<std::string>& names, const Eigen::MatrixXd& session1,
                              const Eigen::MatrixXd& session2, const SelectionConfig& config) {
    config.validate();
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw InvalidArgument("selection: label count mismatch");
    if (static_cast<std::size_t>(x.cols()) != names.size()) throw InvalidArgument("selection: name count mismatch");
    SelectionReport rep;
    auto stop_if_empty = [&](const std::vector<int>& s, const char* stage) {
        if (!s.empty()) return false;
        rep.empty_stage = stage;
        return true;
    };

    std::vector<int> all(static_cast<std::size_t>(x.cols()));
    std::iota(all.begin(), all.end(), 0);
    std::vector<int> after_icc, after_u, after_corr;
    rep.stages.push_back(stage_icc(session1, session2, names, all, config, after_icc));
    if (stop_if_empty(after_icc, "icc")) return rep;

    std::vector<double> pvalues;
    rep.stages.push_back(stage_utest(x, labels, names, after_icc, config, pvalues, after_u));
    if (stop_if_empty(after_u, "utest")) return rep;

    rep.stages.push_back(stage_decorrelate(x, pvalues, names, after_u, config, after_corr));

    const ZScoreParams zp = zscore_fit(x(Eigen::all, after_corr));
    const Eigen::MatrixXd z = zscore_apply(zp, x(Eigen::all, after_corr));
    std::vector<std::string> znames;
    for (int j : after_corr) znames.push_back(names[static_cast<std::size_t>(j)]);
    std::vector<int> local(after_corr.size());
    std::iota(local.begin(), local.end(), 0);

    StageReport mr{"mrmr", {}, {}, false, {}};
    if (static_cast<std::size_t>(config.mrmr_k) >= after_corr.size()) {
        mr.note = "mrmr_k covers every remaining feature; all kept";
    }
    const auto steps = mrmr(z, labels, znames, local, config.mrmr_k);
    std::vector<int> picked;
    for (const auto& s : steps) {
        mr.entries.push_back({znames[static_cast<std::size_t>(s.feature)], s.objective, true});
        picked.push_back(s.feature);
    }
    std::sort(picked.begin(), picked.end());
    for (int j : picked) mr.survivors.push_back(znames[static_cast<std::size_t>(j)]);
    rep.stages.push_back(mr);

    const Eigen::MatrixXd zm = z(Eigen::all, picked);
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i];
    const double lmax = lasso_lambda_max(zm, y);
    std::vector<double> lambdas;
    for (double r : config.lambda_ratios) lambdas.push_back(r * lmax);
    const auto cv = lasso_cv_auc(zm, labels, lambdas, config.cv_folds, derive_seed(config.seed, 0x1a55));
    std::size_t chosen = 0;
    for (std::size_t k = 1; k < cv.size(); ++k)
        if (cv[k] > cv[chosen]) chosen = k;
    const auto path = lasso_path(zm, y, lambdas);
    if (config.max_final_features) {
        while (chosen > 0 && count_nonzero(path[chosen].weights) > static_cast<std::size_t>(*config.max_final_features)) {
            --chosen;
        }
    }
    const LassoFit& fit = path[chosen];
    StageReport la{"lasso", {}, {}, false, {}};
    la.note = "lambda=" + std::to_string(lambdas[chosen]) + " cv_auc=" + std::to_string(cv[chosen]);
    if (!fit.converged) la.note += " not converged (max change " + std::to_string(fit.max_change) + ")";
    for (std::size_t k = 0; k < picked.size(); ++k) {
        const double w = fit.weights(static_cast<Eigen::Index>(k));
        const auto& name = znames[static_cast<std::size_t>(picked[k])];
        la.entries.push_back({name, w, w != 0.0});
        if (w != 0.0) {
            la.survivors.push_back(name);
            rep.selected.push_back(name);
            rep.coefficients.push_back(w);
        }
    }
    rep.lambda = lambdas[chosen];
    rep.stages.push_back(la);
    if (rep.selected.empty()) rep.empty_stage = "lasso";
    return rep;
}

nlohmann::json to_json(const SelectionReport& r) {
    nlohmann::json j;
    j["stages"] = nlohmann::json::array();
    for (const auto& s : r.stages) {
        nlohmann::json st{{"stage", s.stage}, {"skipped", s.skipped}, {"note", s.note}, {"survivors", s.survivors}};
        st["entries"] = nlohmann::json::array();
        for (const auto& e : s.entries) {
            st["entries"].push_back({{"feature", e.feature}, {"statistic", e.statistic}, {"kept", e.kept}});
        }
        j["stages"].push_back(st);
    }
    j["selected"] = r.selected;
    j["coefficients"] = r.coefficients;
    j["lambda"] = r.lambda;
    j["empty_stage"] = r.empty_stage ? nlohmann::json(*r.empty_stage) : nlohmann::json(nullptr);
    return j;
}

SelectionReport selection_from_json(const nlohmann::json& j) {
    SelectionReport r;
    for (const auto& st : j.at("stages")) {
        StageReport s;
        s.stage = st.at("stage").get<std::string>();
        s.skipped = st.at("skipped").get<bool>();
        s.note = st.at("note").get<std::string>();
        s.survivors = st.at("survivors").get<std::vector<std::string>>();
        for (const auto& e : st.at("entries")) {
            s.entries.push_back({e.at("feature").get<std::string>(), e.at("statistic").get<double>(), e.at("kept").get<bool>()});
        }
        r.stages.push_back(std::move(s));
    }
    r.selected = j.at("selected").get<std::vector<std::string>>();
    r.coefficients = j.at("coefficients").get<std::vector<double>>();
    r.lambda = j.at("lambda").get<double>();
    if (!j.at("empty_stage").is_null()) r.empty_stage = j.at("empty_stage").get<std::string>();
    return r;
}

void write_selection_csv(const SelectionReport& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "stage,feature,statistic,kept\n";
    for (const auto& s : r.stages)
        for (const auto& e : s.entries) out << s.stage << ',' << e.feature << ',' << e.statistic << ',' << (e.kept ? 1 : 0) << '\n';
}

}  // namespace radiomx
