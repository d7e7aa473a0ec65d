#include "radiomx/stats.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "radiomx/first_order.hpp"

namespace radiomx {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ZScoreParams zscore_fit(const Eigen::MatrixXd& training) {
    if (training.rows() == 0) throw InvalidArgument("zscore_fit: empty training block");
    ZScoreParams p;
    const auto n = static_cast<double>(training.rows());
    for (Eigen::Index j = 0; j < training.cols(); ++j) {
        const double mean = training.col(j).mean();
        const double ss = (training.col(j).array() - mean).square().sum();
        const double sd = training.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        const bool constant = training.col(j).maxCoeff() == training.col(j).minCoeff() || !(sd > 0.0);
        p.mean.push_back(mean);
        p.sd.push_back(constant ? 0.0 : sd);
        p.constant.push_back(constant);
    }
    return p;
}

Eigen::MatrixXd zscore_apply(const ZScoreParams& params, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.cols()) != params.mean.size()) throw InvalidArgument("zscore_apply: column count");
    Eigen::MatrixXd z(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const auto k = static_cast<std::size_t>(j);
        if (params.constant[k]) {
            z.col(j).setZero();
        } else {
            z.col(j) = (x.col(j).array() - params.mean[k]) / params.sd[k];
        }
    }
    return z;
}

std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = rank;
        i = j + 1;
    }
    return r;
}

namespace {

// Exact two-sided P from the permutation distribution of the doubled rank sum of a group of
// size k drawn from the pooled doubled ranks.
double exact_p(const std::vector<long>& doubled, std::size_t k, long observed) {
    const long total = std::accumulate(doubled.begin(), doubled.end(), 0L);
    std::vector<std::vector<double>> ways(k + 1, std::vector<double>(static_cast<std::size_t>(total) + 1, 0.0));
    ways[0][0] = 1.0;
    std::size_t used = 0;
    for (long r : doubled) {
        ++used;
        for (std::size_t c = std::min(k, used); c >= 1; --c) {
            auto& dst = ways[c];
            const auto& src = ways[c - 1];
            for (long s = total; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
        }
    }
    // Null mean of the doubled sum is k * total / n; compare doubled deviations scaled by n.
    const auto n = static_cast<long>(doubled.size());
    const auto kk = static_cast<long>(k);
    const long dev_obs = std::labs(n * observed - kk * total);
    double hit = 0.0, all = 0.0;
    for (long s = 0; s <= total; ++s) {
        const double w = ways[k][static_cast<std::size_t>(s)];
        if (w == 0.0) continue;
        all += w;
        if (std::labs(n * s - kk * total) >= dev_obs) hit += w;
    }
    return hit / all;
}

}  // namespace

UTestResult mann_whitney(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) throw InvalidArgument("mann_whitney: empty group");
    std::vector<double> pooled(pos.begin(), pos.end());
    pooled.insert(pooled.end(), neg.begin(), neg.end());
    const auto ranks = mid_ranks(pooled);
    const double n1 = static_cast<double>(pos.size()), n2 = static_cast<double>(neg.size());
    double r1 = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) r1 += ranks[i];
    const double u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    UTestResult res;
    res.n_pos = pos.size();
    res.n_neg = neg.size();
    res.u = std::min(u1, n1 * n2 - u1);

    if (pos.size() * neg.size() <= kExactUTestLimit) {
        std::vector<long> doubled(ranks.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
        long obs = 0;
        for (std::size_t i = 0; i < pos.size(); ++i) obs += doubled[i];
        // Enumerate subsets of the smaller group for speed; the statistic is symmetric.
        if (neg.size() < pos.size()) {
            std::rotate(doubled.begin(), doubled.begin() + static_cast<long>(pos.size()), doubled.end());
            obs = std::accumulate(doubled.begin(), doubled.begin() + static_cast<long>(neg.size()), 0L);
            res.p = exact_p(doubled, neg.size(), obs);
        } else {
            res.p = exact_p(doubled, pos.size(), obs);
        }
        res.p = std::min(1.0, res.p);
        return res;
    }

    const double n = n1 + n2;
    std::map<double, double> ties;
    for (double v : pooled) ties[v] += 1.0;
    double tie_term = 0.0;
    for (const auto& [v, t] : ties) tie_term += t * t * t - t;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(u1 - n1 * n2 / 2.0) - 0.5) / std::sqrt(var);
    res.p = std::clamp(std::erfc(z / std::sqrt(2.0)), DBL_MIN, 1.0);
    return res;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
    if (x.size() < 2) throw InvalidArgument("pearson: need at least two values");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double icc_a1(std::span<const double> s1, std::span<const double> s2) {
    if (s1.size() != s2.size()) throw InvalidArgument("icc: session lengths differ");
    if (s1.size() < 3) throw InvalidArgument("icc: need at least three subjects");
    const double n = static_cast<double>(s1.size()), k = 2.0;
    double grand = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        m1 += s1[i];
        m2 += s2[i];
    }
    m1 /= n;
    m2 /= n;
    grand = 0.5 * (m1 + m2);
    double ssr = 0.0, sse = 0.0;
    for (std::size_t i = 0; i < s1.size(); ++i) {
        const double mi = 0.5 * (s1[i] + s2[i]);
        ssr += (mi - grand) * (mi - grand);
        const double e1 = s1[i] - mi - m1 + grand, e2 = s2[i] - mi - m2 + grand;
        sse += e1 * e1 + e2 * e2;
    }
    const double msr = k * ssr / (n - 1.0);
    const double msc = n * ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand)) / (k - 1.0);
    const double mse = sse / ((n - 1.0) * (k - 1.0));
    const double den = msr + (k - 1.0) * mse + k * (msc - mse) / n;
    if (den == 0.0) return 1.0;
    return std::clamp((msr - mse) / den, -1.0, 1.0);
}

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InvalidArgument("auc: scores and labels differ in length");
    bool pos = false, neg = false;
    for (int l : labels) {
        if (l == 1) pos = true;
        else if (l == 0) neg = true;
        else throw InvalidArgument("auc: labels must be 0 or 1");
    }
    if (!pos || !neg) throw InvalidArgument("auc: both classes must be present");
}

double auc_unchecked(std::span<const double> scores, std::span<const int> labels) {
    const auto r = mid_ranks(scores);
    double rp = 0.0, np = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (labels[i] == 1) {
            rp += r[i];
            np += 1.0;
        }
    }
    const double nn = static_cast<double>(r.size()) - np;
    return (rp - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_binary(scores, labels);
    return auc_unchecked(scores, labels);
}

RocResult roc(std::span<const double> scores, std::span<const int> labels) {
    check_binary(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double np = 0.0;
    for (int l : labels) np += l;
    const double nn = static_cast<double>(labels.size()) - np;
    RocResult r;
    r.fpr.push_back(0.0);
    r.tpr.push_back(0.0);
    r.threshold.push_back(std::numeric_limits<double>::infinity());
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = scores[order[i]];
        while (i < order.size() && scores[order[i]] == t) {
            (labels[order[i]] == 1 ? tp : fp) += 1.0;
            ++i;
        }
        r.fpr.push_back(fp / nn);
        r.tpr.push_back(tp / np);
        r.threshold.push_back(t);
    }
    r.auc = auc_unchecked(scores, labels);
    return r;
}

void write_roc_csv(const RocResult& r, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out.precision(17);
    out << "fpr,tpr,threshold\n";
    for (std::size_t i = 0; i < r.fpr.size(); ++i) {
        out << r.fpr[i] << ',' << r.tpr[i] << ',';
        if (std::isinf(r.threshold[i])) out << "inf";
        else out << r.threshold[i];
        out << '\n';
    }
}

std::pair<double, double> bootstrap_auc_ci(std::span<const double> scores, std::span<const int> labels,
                                           int resamples, std::uint64_t seed) {
    check_binary(scores, labels);
    if (resamples < 1) throw InvalidArgument("bootstrap: resample count must be positive");
    const std::size_t n = scores.size();
    std::vector<double> aucs;
    aucs.reserve(static_cast<std::size_t>(resamples));
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (int b = 0; b < resamples; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (;;) {
            int pos = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = pick(rng);
                s[i] = scores[k];
                l[i] = labels[k];
                pos += l[i];
            }
            if (pos > 0 && static_cast<std::size_t>(pos) < n) break;
        }
        aucs.push_back(auc_unchecked(s, l));
    }
    std::sort(aucs.begin(), aucs.end());
    return {percentile(aucs, 2.5), percentile(aucs, 97.5)};
}

double mutual_information(std::span<const int> x, std::span<const int> y) {
    if (x.size() != y.size()) throw InvalidArgument("mutual_information: length mismatch");
    if (x.empty()) return 0.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> px, py;
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[{x[i], y[i]}] += 1.0;
        px[x[i]] += 1.0;
        py[y[i]] += 1.0;
    }
    const double n = static_cast<double>(x.size());
    double mi = 0.0;
    for (const auto& [key, c] : joint) mi += c / n * std::log(c * n / (px[key.first] * py[key.second]));
    return std::max(0.0, mi);
}

double chi_square_2x2(double a, double b, double c, double d) {
    const double n = a + b + c + d;
    const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
    if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return 1.0;
    const double chi2 = n * (a * d - b * c) * (a * d - b * c) / (r1 * r2 * c1 * c2);
    return std::erfc(std::sqrt(chi2 / 2.0));
}

}  // namespace radiomx

namespace radiomx {

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw InvalidArgument("stratified_folds: need at least two folds");
    std::vector<int> out(labels.size(), -1);
    Rng rng(seed);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) idx.push_back(i);
        if (idx.size() < static_cast<std::size_t>(folds)) {
            throw InvalidArgument("stratified_folds: class " + std::to_string(cls) + " has fewer members than folds");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    return out;
}

}  // namespace radiomx
