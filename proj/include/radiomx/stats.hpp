#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "radiomx/volume.hpp"

namespace radiomx {

/// Independent 64-bit seed for stream `index` of a run seeded with `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
using Rng = std::mt19937_64;

struct ZScoreParams {
    std::vector<double> mean;
    std::vector<double> sd;  // sample (N - 1) standard deviation
    std::vector<bool> constant;
};

/// Columns are features, rows samples.
ZScoreParams zscore_fit(const Eigen::MatrixXd& training);
/// Constant features map to 0.
Eigen::MatrixXd zscore_apply(const ZScoreParams& params, const Eigen::MatrixXd& x);

struct UTestResult {
    double u = 0.0;  // min(U_pos, U_neg)
    double p = 1.0;  // two-sided
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

/// Groups with n_pos * n_neg at or below this use the exact permutation distribution.
inline constexpr std::size_t kExactUTestLimit = 400;

/// Mid-ranks for ties. Exact two-sided P (probability of a deviation from the null mean at
/// least as large as observed) when n_pos * n_neg <= 400; otherwise the normal approximation
/// with tie and continuity corrections.
UTestResult mann_whitney(std::span<const double> pos, std::span<const double> neg);

/// Ranks starting at 1, ties replaced by their mean rank.
std::vector<double> mid_ranks(std::span<const double> values);

/// Pearson r; 0 when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-way random-effects, absolute-agreement, single-measurement ICC for two sessions,
/// clamped to [-1, 1]. A zero denominator (no variation at all) gives 1.
double icc_a1(std::span<const double> session1, std::span<const double> session2);

/// P(score_pos > score_neg) + P(tie) / 2.
double auc(std::span<const double> scores, std::span<const int> labels);

struct RocResult {
    std::vector<double> fpr;
    std::vector<double> tpr;
    std::vector<double> threshold;  // +inf for the first point
    double auc = 0.5;
    std::optional<std::pair<double, double>> ci;
};

/// One point per distinct score (descending), predicting positive for score >= threshold.
RocResult roc(std::span<const double> scores, std::span<const int> labels);
void write_roc_csv(const RocResult& r, const std::filesystem::path& path);

/// Percentile bootstrap (2.5 / 97.5) over `resamples` draws of (score, label) pairs.
/// Draw b uses its own stream derive_seed(seed, b); draws missing a class are redrawn.
std::pair<double, double> bootstrap_auc_ci(std::span<const double> scores, std::span<const int> labels,
                                           int resamples, std::uint64_t seed);

/// Plug-in mutual information (natural log) of two discrete variables.
double mutual_information(std::span<const int> x, std::span<const int> y);

/// Two-sided P of Pearson's chi-square test (1 df, no continuity correction) on a 2x2 table
/// {{a, b}, {c, d}}. Returns 1 when a margin is empty.
double chi_square_2x2(double a, double b, double c, double d);

}  // namespace radiomx

namespace radiomx {

/// Fold index per sample: each class is shuffled with `seed` and dealt round-robin into
/// `folds` folds. Throws when a class has fewer than `folds` members.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

}  // namespace radiomx
