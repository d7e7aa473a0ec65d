#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "radiomx/volume.hpp"

namespace radiomx {

/// Log-spaced ratios lambda / lambda_max from 1 down to `smallest`.
std::vector<double> default_lambda_ratios(int count = 30, double smallest = 1e-3);

struct SelectionConfig {
    double icc_threshold = 0.75;
    double p_threshold = 0.05;
    double corr_threshold = 0.95;
    int mrmr_k = 30;
    /// LASSO grid as ratios of lambda_max, descending.
    std::vector<double> lambda_ratios = default_lambda_ratios();
    std::optional<int> max_final_features;
    int cv_folds = 5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct StageEntry {
    std::string feature;
    double statistic = 0.0;
    bool kept = false;
};

struct StageReport {
    std::string stage;  // "icc", "utest", "decorrelate", "mrmr", "lasso"
    std::vector<StageEntry> entries;
    std::vector<std::string> survivors;
    bool skipped = false;
    std::string note;
};

struct SelectionReport {
    std::vector<StageReport> stages;
    std::vector<std::string> selected;  // final set, catalog order
    std::vector<double> coefficients;   // LASSO weights of `selected`
    double lambda = 0.0;
    std::optional<std::string> empty_stage;  // first stage that left nothing

    [[nodiscard]] bool empty() const { return selected.empty(); }
};

nlohmann::json to_json(const SelectionReport& r);
SelectionReport selection_from_json(const nlohmann::json& j);
/// Flat rows: stage,feature,statistic,kept.
void write_selection_csv(const SelectionReport& r, const std::filesystem::path& path);

// Individual stages work on column indices of a samples x features matrix.

/// Keeps features whose ICC(A,1) between the two sessions is strictly above the threshold.
StageReport stage_icc(const Eigen::MatrixXd& session1, const Eigen::MatrixXd& session2,
                      const std::vector<std::string>& names, const std::vector<int>& candidates,
                      const SelectionConfig& config, std::vector<int>& survivors);

/// Keeps P <= threshold; `pvalues` receives P per column (NaN for non-candidates).
StageReport stage_utest(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                        const std::vector<std::string>& names, const std::vector<int>& candidates,
                        const SelectionConfig& config, std::vector<double>& pvalues,
                        std::vector<int>& survivors);

/// Greedy by ascending P (ties by name): keep when max |r| against kept features <= threshold.
StageReport stage_decorrelate(const Eigen::MatrixXd& x, const std::vector<double>& pvalues,
                              const std::vector<std::string>& names, const std::vector<int>& candidates,
                              const SelectionConfig& config, std::vector<int>& survivors);

/// 4 equal-frequency bins: edges at sorted positions floor(k N / 4), k = 1..3;
/// bin = number of edges <= value.
std::vector<int> equal_frequency_bins(const Eigen::VectorXd& column, int bins = 4);

struct MrmrStep {
    int feature;
    double objective;
};

/// Greedy relevance minus mean redundancy; ties go to the lexicographically smaller name.
std::vector<MrmrStep> mrmr(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                           const std::vector<std::string>& names, const std::vector<int>& candidates, int k);

struct LassoFit {
    Eigen::VectorXd weights;
    double intercept = 0.0;
    double lambda = 0.0;
    int sweeps = 0;
    double max_change = 0.0;
    double kkt = 0.0;
    bool converged = false;
};

/// max_j |2 X_j^T (y - mean y)| over centred columns.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Minimizes sum (y - b - X w)^2 + lambda |w|_1 by cyclic coordinate descent. Stops once the
/// largest coefficient change in a sweep is below 1e-6 and the KKT residual is within 1e-4,
/// or after 10000 sweeps.
LassoFit lasso_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                   const Eigen::VectorXd* warm_start = nullptr);

/// Largest violation of the LASSO optimality conditions.
double lasso_kkt_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                          double lambda);

/// Fits along a descending lambda grid with warm starts.
std::vector<LassoFit> lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<double>& lambdas);

/// Full chain on the training cohort. `x` holds raw feature values; standardization is fitted
/// on `x`. `session1`/`session2` are repeat-segmentation rows (same columns) or empty.
SelectionReport run_selection(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                              const std::vector<std::string>& names, const Eigen::MatrixXd& session1,
                              const Eigen::MatrixXd& session2, const SelectionConfig& config);

}  // namespace radiomx
