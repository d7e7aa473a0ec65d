#include "radiomx/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "radiomx/stats.hpp"

namespace radiomx {

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::Logistic ? "logistic" : "svm_rbf"; }

ModelKind parse_model_kind(std::string_view s) {
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "svm_rbf") return ModelKind::SvmRbf;
    throw InvalidArgument("unknown model kind: " + std::string(s));
}

namespace {

void check_xy(const Eigen::MatrixXd& x, const std::vector<int>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidArgument("row and label counts differ");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1) pos = true;
        else if (v == 0) neg = true;
        else throw InvalidArgument("labels must be 0 or 1");
    }
    if (!pos || !neg) throw InvalidArgument("both classes must be present");
}

// log(1 + exp(t)) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& x, const std::vector<int>& y, const Eigen::VectorXd& w, double b,
                          double l2, Eigen::VectorXd* gradient) {
    const Eigen::VectorXd t = (x * w).array() + b;
    double f = 0.5 * l2 * w.squaredNorm();
    Eigen::VectorXd r(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const int yi = y[static_cast<std::size_t>(i)];
        f += softplus(t(i)) - yi * t(i);
        r(i) = sigmoid(t(i)) - yi;
    }
    if (gradient) {
        gradient->resize(w.size() + 1);
        gradient->head(w.size()) = x.transpose() * r + l2 * w;
        (*gradient)(w.size()) = r.sum();
    }
    return f;
}

LogisticModel logistic_fit(const Eigen::MatrixXd& x, const std::vector<int>& y, double l2) {
    check_xy(x, y);
    if (l2 < 0.0) throw InvalidArgument("logistic: l2 must be non-negative");
    const Eigen::Index p = x.cols(), n = x.rows();
    Eigen::MatrixXd xa(n, p + 1);
    xa << x, Eigen::VectorXd::Ones(n);
    LogisticModel m;
    m.l2 = l2;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd g;
    double f = logistic_objective(x, y, theta.head(p), theta(p), l2, &g);
    for (m.iterations = 0; m.iterations < 200; ++m.iterations) {
        if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
            m.converged = true;
            break;
        }
        const Eigen::VectorXd t = xa * theta;
        Eigen::VectorXd wts(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = sigmoid(t(i));
            wts(i) = s * (1.0 - s);
        }
        Eigen::MatrixXd h = xa.transpose() * wts.asDiagonal() * xa;
        h.diagonal().head(p).array() += l2;
        h.diagonal().array() += 1e-12;
        const Eigen::VectorXd step = h.ldlt().solve(g);
        double a = 1.0;
        Eigen::VectorXd next, gn;
        double fn = f;
        for (int k = 0; k < 60; ++k, a *= 0.5) {
            next = theta - a * step;
            fn = logistic_objective(x, y, next.head(p), next(p), l2, &gn);
            if (fn <= f - 1e-4 * a * g.dot(step)) break;
        }
        if (!(fn <= f)) break;  // no descent possible at machine precision
        theta = next;
        g = gn;
        f = fn;
    }
    m.weights = theta.head(p);
    m.intercept = theta(p);
    m.objective = f;
    m.gradient_norm = g.lpNorm<Eigen::Infinity>();
    m.converged = m.gradient_norm < 1e-8;
    return m;
}

Eigen::VectorXd predict_proba(const LogisticModel& m, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd t = (x * m.weights).array() + m.intercept;
    return t.unaryExpr([](double v) { return sigmoid(v); });
}

namespace {

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
    const Eigen::VectorXd na = a.rowwise().squaredNorm(), nb = b.rowwise().squaredNorm();
    Eigen::MatrixXd d = (-2.0 * a * b.transpose()).colwise() + na;
    d.rowwise() += nb.transpose();
    return (-gamma * d.array().max(0.0)).exp().matrix();
}

}  // namespace

SvmModel svm_rbf_fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c, double gamma) {
    check_xy(x, labels);
    if (!(c > 0.0) || !(gamma > 0.0)) throw InvalidArgument("svm: C and gamma must be positive");
    const Eigen::Index n = x.rows();
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> y(un);
    for (std::size_t i = 0; i < un; ++i) y[i] = labels[i] == 1 ? 1.0 : -1.0;
    const Eigen::MatrixXd k = rbf_kernel(x, x, gamma);
    auto q = [&](Eigen::Index i, Eigen::Index j) { return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * k(i, j); };
    constexpr double tau = 1e-12;
    std::vector<double> alpha(un, 0.0), g(un, -1.0);
    auto up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
    auto low = [&](std::size_t t) { return (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0); };

    SvmModel m;
    m.c = c;
    m.gamma = gamma;
    for (m.iterations = 0; m.iterations < kSmoMaxIterations; ++m.iterations) {
        double gmax = -std::numeric_limits<double>::infinity(), gmax2 = gmax;
        std::size_t i = un;
        for (std::size_t t = 0; t < un; ++t) {
            if (up(t) && -y[t] * g[t] >= gmax) {
                gmax = -y[t] * g[t];
                i = t;
            }
        }
        std::size_t j = un;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < un; ++t) {
            if (!low(t)) continue;
            gmax2 = std::max(gmax2, y[t] * g[t]);
            if (i == un) continue;
            const double bdiff = gmax + y[t] * g[t];
            if (bdiff <= 0) continue;
            const auto ii = static_cast<Eigen::Index>(i), tt = static_cast<Eigen::Index>(t);
            double a = k(ii, ii) + k(tt, tt) - 2.0 * k(ii, tt);
            if (a <= 0) a = tau;
            const double obj = -bdiff * bdiff / a;
            if (obj <= best) {
                best = obj;
                j = t;
            }
        }
        if (i == un || j == un || gmax + gmax2 < kSmoTolerance) {
            m.converged = true;
            break;
        }
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = k(ii, ii) + k(jj, jj) + 2.0 * q(ii, jj);
            if (quad <= 0) quad = tau;
            const double delta = (-g[i] - g[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = k(ii, ii) + k(jj, jj) - 2.0 * q(ii, jj);
            if (quad <= 0) quad = tau;
            const double delta = (g[i] - g[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < un; ++t) {
            const auto tt = static_cast<Eigen::Index>(t);
            g[t] += q(tt, ii) * di + q(tt, jj) * dj;
        }
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    int nfree = 0;
    for (std::size_t t = 0; t < un; ++t) {
        const double yg = y[t] * g[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++nfree;
            sum_free += yg;
        }
    }
    const double rho = nfree > 0 ? sum_free / nfree : 0.5 * (ub + lb);
    m.intercept = -rho;

    double obj = 0.0;
    for (std::size_t t = 0; t < un; ++t) obj += alpha[t] * (g[t] - 1.0);
    m.objective = -0.5 * obj;

    std::vector<Eigen::Index> sv;
    for (std::size_t t = 0; t < un; ++t)
        if (alpha[t] > 0) sv.push_back(static_cast<Eigen::Index>(t));
    m.support = x(sv, Eigen::all);
    m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
        const auto t = static_cast<std::size_t>(sv[s]);
        m.dual_coef(static_cast<Eigen::Index>(s)) = alpha[t] * y[t];
    }
    m.alpha = Eigen::Map<Eigen::VectorXd>(alpha.data(), n);
    return m;
}

Eigen::VectorXd decision(const SvmModel& m, const Eigen::MatrixXd& x) {
    if (m.support.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), m.intercept);
    return (rbf_kernel(x, m.support, m.gamma) * m.dual_coef).array() + m.intercept;
}

std::vector<GridPoint> default_grid(ModelKind kind, int feature_count) {
    std::vector<GridPoint> g;
    if (kind == ModelKind::Logistic) {
        for (double l2 : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) g.push_back({ModelKind::Logistic, 0.0, 0.0, l2});
    } else {
        const double p = std::max(1, feature_count);
        for (double c : {0.1, 1.0, 10.0, 100.0})
            for (double gm : {0.01, 0.1, 1.0}) g.push_back({ModelKind::SvmRbf, c, gm / p, 0.0});
    }
    return g;
}

namespace {

Eigen::VectorXd fit_predict(const Eigen::MatrixXd& xt, const std::vector<int>& yt, const Eigen::MatrixXd& xv,
                            const GridPoint& p) {
    if (p.kind == ModelKind::Logistic) return predict_proba(logistic_fit(xt, yt, p.l2), xv);
    return decision(svm_rbf_fit(xt, yt, p.c, p.gamma), xv);
}

// True when a is preferred over b at equal CV AUC.
bool simpler(const GridPoint& a, const GridPoint& b) {
    if (a.kind != b.kind) return a.kind == ModelKind::Logistic;
    if (a.c != b.c) return a.c < b.c;
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    return a.l2 > b.l2;
}

}  // namespace

GridSearchResult grid_search_cv(const Eigen::MatrixXd& x, const std::vector<int>& y, const std::vector<GridPoint>& grid,
                                int folds, std::uint64_t seed) {
    check_xy(x, y);
    if (grid.empty()) throw InvalidArgument("grid search: empty grid");
    const auto fold = stratified_folds(y, folds, seed);
    GridSearchResult res;
    for (const auto& p : grid) res.table.push_back({p, 0.0});
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> tr, va;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
        const Eigen::MatrixXd xt = x(tr, Eigen::all), xv = x(va, Eigen::all);
        std::vector<int> yt, yv;
        for (auto i : tr) yt.push_back(y[static_cast<std::size_t>(i)]);
        for (auto i : va) yv.push_back(y[static_cast<std::size_t>(i)]);
        for (auto& row : res.table) {
            const Eigen::VectorXd s = fit_predict(xt, yt, xv, row.point);
            row.mean_auc += auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), yv) / folds;
        }
    }
    const CvRow* best = &res.table.front();
    for (const auto& row : res.table) {
        if (row.mean_auc > best->mean_auc || (row.mean_auc == best->mean_auc && simpler(row.point, best->point))) best = &row;
    }
    res.chosen = best->point;
    return res;
}

ModelArtifact fit_model(const Eigen::MatrixXd& z, const std::vector<int>& y, const GridPoint& point) {
    ModelArtifact m;
    m.kind = point.kind;
    m.chosen = point;
    if (point.kind == ModelKind::Logistic) {
        m.logistic = logistic_fit(z, y, point.l2);
    } else {
        m.svm = svm_rbf_fit(z, y, point.c, point.gamma);
    }
    return m;
}

Eigen::VectorXd score(const ModelArtifact& m, const Eigen::MatrixXd& raw) {
    if (static_cast<std::size_t>(raw.cols()) != m.features.size()) throw InvalidArgument("score: column count mismatch");
    Eigen::MatrixXd z(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (m.feature_sd[k] > 0.0) z.col(j) = (raw.col(j).array() - m.feature_mean[k]) / m.feature_sd[k];
        else z.col(j).setZero();
    }
    return m.kind == ModelKind::Logistic ? predict_proba(m.logistic, z) : decision(m.svm, z);
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json point_json(const GridPoint& p) {
    return {{"kind", model_kind_name(p.kind)}, {"C", p.c}, {"gamma", p.gamma}, {"l2", p.l2}};
}
GridPoint point_from(const nlohmann::json& j) {
    return {parse_model_kind(j.at("kind").get<std::string>()), j.at("C").get<double>(), j.at("gamma").get<double>(),
            j.at("l2").get<double>()};
}

}  // namespace

nlohmann::json to_json(const ModelArtifact& m) {
    nlohmann::json j;
    j["kind"] = model_kind_name(m.kind);
    j["features"] = m.features;
    j["feature_mean"] = m.feature_mean;
    j["feature_sd"] = m.feature_sd;
    j["hyperparameters"] = point_json(m.chosen);
    j["cv_table"] = nlohmann::json::array();
    for (const auto& r : m.cv_table) j["cv_table"].push_back({{"point", point_json(r.point)}, {"mean_auc", r.mean_auc}});
    if (m.kind == ModelKind::Logistic) {
        j["parameters"] = {{"weights", to_vec(m.logistic.weights)}, {"intercept", m.logistic.intercept}};
        j["diagnostics"] = {{"iterations", m.logistic.iterations},
                            {"objective", m.logistic.objective},
                            {"gradient_norm", m.logistic.gradient_norm},
                            {"converged", m.logistic.converged}};
    } else {
        nlohmann::json sv = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.svm.support.rows(); ++r) sv.push_back(to_vec(m.svm.support.row(r).transpose()));
        j["parameters"] = {{"support_vectors", sv},      {"dual_coef", to_vec(m.svm.dual_coef)},
                           {"intercept", m.svm.intercept}, {"C", m.svm.c},
                           {"gamma", m.svm.gamma}};
        j["diagnostics"] = {{"iterations", m.svm.iterations},
                            {"objective", m.svm.objective},
                            {"converged", m.svm.converged}};
    }
    return j;
}

ModelArtifact model_from_json(const nlohmann::json& j) {
    ModelArtifact m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.features = j.at("features").get<std::vector<std::string>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_sd = j.at("feature_sd").get<std::vector<double>>();
    m.chosen = point_from(j.at("hyperparameters"));
    for (const auto& r : j.at("cv_table")) m.cv_table.push_back({point_from(r.at("point")), r.at("mean_auc").get<double>()});
    const auto& p = j.at("parameters");
    const auto& d = j.at("diagnostics");
    if (m.kind == ModelKind::Logistic) {
        m.logistic.weights = from_vec(p.at("weights").get<std::vector<double>>());
        m.logistic.intercept = p.at("intercept").get<double>();
        m.logistic.l2 = m.chosen.l2;
        m.logistic.iterations = d.at("iterations").get<int>();
        m.logistic.objective = d.at("objective").get<double>();
        m.logistic.gradient_norm = d.at("gradient_norm").get<double>();
        m.logistic.converged = d.at("converged").get<bool>();
    } else {
        const auto sv = p.at("support_vectors").get<std::vector<std::vector<double>>>();
        const auto cols = sv.empty() ? static_cast<Eigen::Index>(m.features.size()) : static_cast<Eigen::Index>(sv[0].size());
        m.svm.support.resize(static_cast<Eigen::Index>(sv.size()), cols);
        for (std::size_t r = 0; r < sv.size(); ++r)
            for (std::size_t c = 0; c < sv[r].size(); ++c) m.svm.support(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sv[r][c];
        m.svm.dual_coef = from_vec(p.at("dual_coef").get<std::vector<double>>());
        m.svm.intercept = p.at("intercept").get<double>();
        m.svm.c = p.at("C").get<double>();
        m.svm.gamma = p.at("gamma").get<double>();
        m.svm.iterations = d.at("iterations").get<long>();
        m.svm.objective = d.at("objective").get<double>();
        m.svm.converged = d.at("converged").get<bool>();
    }
    return m;
}

}  // namespace radiomx
