#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "radiomx/volume.hpp"

namespace radiomx {

enum class ModelKind { Logistic, SvmRbf };
std::string_view model_kind_name(ModelKind k);  // "logistic", "svm_rbf"
ModelKind parse_model_kind(std::string_view s);

inline constexpr double kDefaultL2 = 1e-4;

struct LogisticModel {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    double l2 = kDefaultL2;
    int iterations = 0;
    double objective = 0.0;
    double gradient_norm = 0.0;  // infinity norm at the returned iterate
    bool converged = false;
};

/// Minimizes sum of log-losses + (l2 / 2) |w|^2 (intercept unpenalized) by damped Newton;
/// stops when the gradient infinity-norm is below 1e-8 or after 200 iterations.
LogisticModel logistic_fit(const Eigen::MatrixXd& x, const std::vector<int>& y, double l2 = kDefaultL2);
/// Penalized objective and its gradient (weights first, intercept last).
double logistic_objective(const Eigen::MatrixXd& x, const std::vector<int>& y, const Eigen::VectorXd& w, double b,
                          double l2, Eigen::VectorXd* gradient = nullptr);
Eigen::VectorXd predict_proba(const LogisticModel& m, const Eigen::MatrixXd& x);

struct SvmModel {
    Eigen::MatrixXd support;     // rows = support vectors
    Eigen::VectorXd dual_coef;   // alpha_i * y_i
    double intercept = 0.0;
    double c = 1.0;
    double gamma = 1.0;
    long iterations = 0;
    double objective = 0.0;      // dual objective sum(alpha) - alpha^T Q alpha / 2
    bool converged = false;
    Eigen::VectorXd alpha;       // all training duals (diagnostics)
};

inline constexpr double kSmoTolerance = 1e-3;
inline constexpr long kSmoMaxIterations = 1000000;

/// Soft-margin dual with K(u, v) = exp(-gamma |u - v|^2), solved by SMO with second-order
/// working-set selection. Labels are 0/1 (mapped to -1/+1).
SvmModel svm_rbf_fit(const Eigen::MatrixXd& x, const std::vector<int>& y, double c, double gamma);
Eigen::VectorXd decision(const SvmModel& m, const Eigen::MatrixXd& x);

struct GridPoint {
    ModelKind kind = ModelKind::Logistic;
    double c = 0.0;      // SVM
    double gamma = 0.0;  // SVM
    double l2 = 0.0;     // logistic

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Default grids: C in {0.1, 1, 10, 100} x gamma in {0.01, 0.1, 1} / features; L2 in {1e-4 .. 1}.
std::vector<GridPoint> default_grid(ModelKind kind, int feature_count);

struct CvRow {
    GridPoint point;
    double mean_auc = 0.0;
};

struct GridSearchResult {
    GridPoint chosen;
    std::vector<CvRow> table;
};

/// Stratified k-fold (seeded). Picks the highest mean fold AUC; ties go to logistic, then
/// smaller C, smaller gamma, larger L2.
GridSearchResult grid_search_cv(const Eigen::MatrixXd& x, const std::vector<int>& y, const std::vector<GridPoint>& grid,
                                int folds, std::uint64_t seed);

/// Trained classifier plus the standardization of its inputs.
struct ModelArtifact {
    ModelKind kind = ModelKind::Logistic;
    std::vector<std::string> features;
    std::vector<double> feature_mean;
    std::vector<double> feature_sd;  // 0 marks a constant feature
    LogisticModel logistic;
    SvmModel svm;
    GridPoint chosen;
    std::vector<CvRow> cv_table;
};

/// Fits `point` on standardized training data.
ModelArtifact fit_model(const Eigen::MatrixXd& z, const std::vector<int>& y, const GridPoint& point);

/// Scores raw (unstandardized) rows whose columns follow `m.features`. Logistic gives
/// probabilities, SVM raw decision values.
Eigen::VectorXd score(const ModelArtifact& m, const Eigen::MatrixXd& raw);

nlohmann::json to_json(const ModelArtifact& m);
ModelArtifact model_from_json(const nlohmann::json& j);

}  // namespace radiomx
