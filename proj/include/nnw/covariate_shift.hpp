#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nnw/core.hpp"
#include "nnw/distributions.hpp"
#include "nnw/nn_index.hpp"
#include "nnw/nn_measure.hpp"

namespace nnw {

struct PredictorHandle {
    std::string label;
    std::function<std::vector<double>(std::span<const double>)> predict;

    std::vector<double> operator()(std::span<const double> x) const { return predict(x); }
};

enum class LossKind { squared_error, misclassification };

/// Nonnegative loss of a prediction against a response of the same dimension.
struct LossSpec {
    LossKind kind = LossKind::squared_error;
    double scale = 1.0;

    static LossSpec squared_error(double scale = 1.0) { return {LossKind::squared_error, scale}; }
    /// 0 when every coordinate of the prediction rounds to the label, else 1 (times scale).
    static LossSpec misclassification(double scale = 1.0) { return {LossKind::misclassification, scale}; }

    [[nodiscard]] std::string name() const {
        return kind == LossKind::squared_error ? "squared_error" : "misclassification";
    }

    double operator()(std::span<const double> prediction, std::span<const double> y) const {
        if (prediction.size() != y.size())
            throw std::invalid_argument("loss: prediction dimension " + std::to_string(prediction.size()) +
                                        " != response dimension " + std::to_string(y.size()));
        double acc = 0.0;
        if (kind == LossKind::squared_error) {
            for (std::size_t c = 0; c < y.size(); ++c) acc += (prediction[c] - y[c]) * (prediction[c] - y[c]);
        } else {
            for (std::size_t c = 0; c < y.size(); ++c)
                if (std::round(prediction[c]) != std::round(y[c])) acc = 1.0;
        }
        return scale * acc;
    }
};

/// Covariates with their responses.
struct LabeledRows {
    PointSet x;
    PointSet y;

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }

    [[nodiscard]] LabeledRows subset(std::span<const std::size_t> rows) const {
        LabeledRows out{PointSet(rows.size(), x.dim()), PointSet(rows.size(), y.dim())};
        for (std::size_t k = 0; k < rows.size(); ++k) {
            std::copy(x[rows[k]].begin(), x[rows[k]].end(), out.x.row(k).begin());
            std::copy(y[rows[k]].begin(), y[rows[k]].end(), out.y.row(k).begin());
        }
        return out;
    }
};

/// Disjoint train / validation / test row sets.
struct SplitSpec {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;

    void validate(std::size_t rows) const {
        std::vector<int> seen(rows, 0);
        for (const auto* part : {&train, &validation, &test})
            for (std::size_t r : *part) {
                if (r >= rows) throw std::invalid_argument("SplitSpec: row index out of range");
                if (seen[r]++) throw std::invalid_argument("SplitSpec: row " + std::to_string(r) + " in two sets");
            }
    }
};

enum class RiskKind { test_error_tilde_e, one_nn_risk, cross_validated, empirical };

[[nodiscard]] constexpr std::string_view to_string(RiskKind k) noexcept {
    switch (k) {
        case RiskKind::test_error_tilde_e: return "one_nn_test_error";
        case RiskKind::one_nn_risk: return "one_nn_risk";
        case RiskKind::cross_validated: return "one_nn_cross_validated";
        case RiskKind::empirical: return "empirical";
    }
    return "?";
}

struct RiskEstimate {
    double value = 0.0;
    RiskKind kind = RiskKind::test_error_tilde_e;
    std::size_t n_reference = 0;  ///< validation or training rows the losses come from
    std::size_t n_test = 0;
};

namespace detail {

[[nodiscard]] inline std::vector<std::uint64_t> nn_counts(const PointSet& reference, const PointSet& targets,
                                                          std::uint64_t tie_seed, unsigned threads) {
    if (reference.empty()) throw std::invalid_argument("covariate shift: empty reference split");
    if (targets.empty()) throw std::invalid_argument("covariate shift: empty test split");
    if (reference.dim() != targets.dim())
        throw std::invalid_argument("covariate shift: covariate dimension mismatch (" +
                                    std::to_string(reference.dim()) + " vs " + std::to_string(targets.dim()) + ")");
    const NNIndex index(reference, tie_seed);
    const auto nearest = assign_nearest(index, targets, threads);
    std::vector<std::uint64_t> counts(reference.size(), 0);
    for (std::size_t j : nearest) ++counts[j];
    return counts;
}

[[nodiscard]] inline double count_weighted_mean(std::span<const std::uint64_t> counts, std::span<const double> values,
                                                std::size_t total) {
    const std::vector<double> c(counts.begin(), counts.end());
    return accurate_weighted_mean(c, values, static_cast<double>(total));
}

[[nodiscard]] inline std::vector<double> losses_of(const LabeledRows& rows, const PredictorHandle& h,
                                                   const LossSpec& loss) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = loss(h(rows.x[i]), rows.y[i]);
    return out;
}

}  // namespace detail

/// Mean over test rows of the loss at each row's nearest validation row.
[[nodiscard]] inline RiskEstimate estimate_test_error(const PointSet& val_covariates, std::span<const double> val_losses,
                                                      const PointSet& test_covariates, std::uint64_t tie_seed,
                                                      unsigned threads = 1) {
    if (val_losses.size() != val_covariates.size())
        throw std::invalid_argument("estimate_test_error: need one loss per validation row");
    const auto counts = detail::nn_counts(val_covariates, test_covariates, tie_seed, threads);
    return {detail::count_weighted_mean(counts, val_losses, test_covariates.size()), RiskKind::test_error_tilde_e,
            val_covariates.size(), test_covariates.size()};
}

/// Training loss of h reweighted by how often each training row is a test row's nearest neighbor.
[[nodiscard]] inline RiskEstimate one_nn_empirical_risk(const LabeledRows& train, const PointSet& test_covariates,
                                                        const PredictorHandle& h, const LossSpec& loss,
                                                        std::uint64_t tie_seed, unsigned threads = 1) {
    const auto counts = detail::nn_counts(train.x, test_covariates, tie_seed, threads);
    const auto losses = detail::losses_of(train, h, loss);
    return {detail::count_weighted_mean(counts, losses, test_covariates.size()), RiskKind::one_nn_risk, train.size(),
            test_covariates.size()};
}

/// Plain mean training loss (no reweighting).
[[nodiscard]] inline RiskEstimate empirical_risk(const LabeledRows& rows, const PredictorHandle& h,
                                                 const LossSpec& loss) {
    if (rows.size() == 0) throw std::invalid_argument("empirical_risk: no rows");
    const auto losses = detail::losses_of(rows, h, loss);
    return {accurate_sum(losses) / static_cast<double>(losses.size()), RiskKind::empirical, rows.size(), 0};
}

struct Selection {
    std::size_t best = 0;
    PredictorHandle chosen;
    std::vector<RiskEstimate> risks;  ///< in hypothesis order
};

/// Arg-min of the 1NN empirical risk over a finite class; ties go to the earlier hypothesis.
[[nodiscard]] inline Selection select_hypothesis(std::span<const PredictorHandle> hypotheses, const LabeledRows& train,
                                                 const PointSet& test_covariates, const LossSpec& loss,
                                                 std::uint64_t tie_seed, unsigned threads = 1) {
    if (hypotheses.empty()) throw std::invalid_argument("select_hypothesis: empty hypothesis list");
    const auto counts = detail::nn_counts(train.x, test_covariates, tie_seed, threads);
    Selection sel;
    for (const auto& h : hypotheses) {
        const auto losses = detail::losses_of(train, h, loss);
        sel.risks.push_back({detail::count_weighted_mean(counts, losses, test_covariates.size()), RiskKind::one_nn_risk,
                             train.size(), test_covariates.size()});
    }
    for (std::size_t i = 1; i < sel.risks.size(); ++i)
        if (sel.risks[i].value < sel.risks[sel.best].value) sel.best = i;
    sel.chosen = hypotheses[sel.best];
    return sel;
}

/// Same arg-min under the unweighted training risk, for comparison.
[[nodiscard]] inline std::size_t select_by_empirical_risk(std::span<const PredictorHandle> hypotheses,
                                                          const LabeledRows& train, const LossSpec& loss) {
    if (hypotheses.empty()) throw std::invalid_argument("select_by_empirical_risk: empty hypothesis list");
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const double r = empirical_risk(train, hypotheses[i], loss).value;
        if (r < best_risk) {
            best_risk = r;
            best = i;
        }
    }
    return best;
}

using PredictorFactory = std::function<PredictorHandle(const LabeledRows&)>;

struct CrossValidation {
    RiskEstimate estimate;
    std::vector<double> fold_estimates;
    double standard_cv_error = 0.0;  ///< pooled mean validation loss, no reweighting
};

/// Rotates k folds (row i belongs to fold i mod k) as the validation set, fits on
/// the rest, and averages the per-fold 1NN test-error estimates.
[[nodiscard]] inline CrossValidation cross_validated_error(const LabeledRows& rows, const PointSet& test_covariates,
                                                           const PredictorFactory& factory, const LossSpec& loss,
                                                           std::size_t k, std::uint64_t tie_seed,
                                                           unsigned threads = 1) {
    if (k < 2) throw std::invalid_argument("cross_validated_error: need k >= 2 folds");
    if (k > rows.size())
        throw std::invalid_argument("cross_validated_error: k = " + std::to_string(k) + " exceeds row count " +
                                    std::to_string(rows.size()));
    CrossValidation cv;
    std::vector<double> all_losses;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> fit_rows;
        std::vector<std::size_t> val_rows;
        for (std::size_t i = 0; i < rows.size(); ++i) (i % k == f ? val_rows : fit_rows).push_back(i);
        if (fit_rows.empty()) throw std::invalid_argument("cross_validated_error: fold too small to fit predictor");
        const LabeledRows fit = rows.subset(fit_rows);
        const LabeledRows val = rows.subset(val_rows);
        const PredictorHandle h = factory(fit);
        const auto losses = detail::losses_of(val, h, loss);
        all_losses.insert(all_losses.end(), losses.begin(), losses.end());
        cv.fold_estimates.push_back(estimate_test_error(val.x, losses, test_covariates, tie_seed, threads).value);
    }
    cv.estimate = {accurate_sum(cv.fold_estimates) / static_cast<double>(k), RiskKind::cross_validated, rows.size(),
                   test_covariates.size()};
    cv.standard_cv_error = accurate_sum(all_losses) / static_cast<double>(all_losses.size());
    return cv;
}

// --- predictors -----------------------------------------------------------------

[[nodiscard]] inline PredictorHandle constant_predictor(std::vector<double> value, std::string label = {}) {
    if (label.empty()) {
        label = "constant(";
        for (std::size_t i = 0; i < value.size(); ++i) label += (i ? "," : "") + std::to_string(value[i]);
        label += ")";
    }
    return {std::move(label), [value = std::move(value)](std::span<const double>) { return value; }};
}

/// Affine least squares with an L2 penalty on the slopes (intercept unpenalized).
[[nodiscard]] inline PredictorFactory ridge_factory(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_factory: lambda must be >= 0");
    return [lambda](const LabeledRows& rows) -> PredictorHandle {
        const std::size_t n = rows.size();
        const std::size_t p = rows.x.dim();
        const std::size_t d = rows.y.dim();
        if (n < 2) throw std::invalid_argument("ridge: fold too small to fit predictor");
        Eigen::MatrixXd a(n, p + 1);
        Eigen::MatrixXd b(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            a(static_cast<Eigen::Index>(i), 0) = 1.0;
            for (std::size_t c = 0; c < p; ++c)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c + 1)) = rows.x[i][c];
            for (std::size_t c = 0; c < d; ++c)
                b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows.y[i][c];
        }
        Eigen::MatrixXd gram = a.transpose() * a;
        for (std::size_t c = 1; c <= p; ++c) gram(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c)) += lambda;
        const Eigen::MatrixXd coef = gram.ldlt().solve(a.transpose() * b);
        if (!coef.allFinite()) throw std::runtime_error("ridge: singular system");
        return {"ridge(lambda=" + std::to_string(lambda) + ")", [coef, p, d](std::span<const double> x) {
                    std::vector<double> out(d);
                    for (std::size_t c = 0; c < d; ++c) {
                        double v = coef(0, static_cast<Eigen::Index>(c));
                        for (std::size_t k = 0; k < p; ++k)
                            v += coef(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(c)) * x[k];
                        out[c] = v;
                    }
                    return out;
                }};
    };
}

// --- synthetic shift --------------------------------------------------------------

/// Y = response_mean(X) + Normal(0, noise_sd^2), X ~ train_x for training rows and ~ test_x for test rows.
struct ShiftScenario {
    DistributionSpec train_x;
    DistributionSpec test_x;
    std::function<double(double)> response_mean;
    double noise_sd = 0.5;

    /// Gaussian covariates widened at test time, linear response.
    static ShiftScenario gaussian_linear() {
        return {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::gaussian(0.0, 1.5),
                [](double x) { return 2.0 * x; }, 0.5};
    }
    /// Step response at 0.8 with the test mass moved onto the step.
    static ShiftScenario step() {
        return {DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(0.8, 1.0),
                [](double x) { return x > 0.8 ? 1.0 : 0.0; }, 0.1};
    }
    static ShiftScenario no_shift() {
        return {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::gaussian(0.0, 1.0),
                [](double x) { return 2.0 * x; }, 0.5};
    }
};

struct ShiftSample {
    LabeledRows train;
    PointSet test_x;
    PointSet test_y_hidden;  ///< oracle use only
};

[[nodiscard]] inline LabeledRows draw_labeled(const DistributionSpec& law, const ShiftScenario& s, std::size_t n,
                                              std::uint64_t seed) {
    LabeledRows rows{sample_points(law, n, derive_seed(seed, 21)), PointSet(n, 1)};
    std::mt19937_64 eng(derive_seed(seed, 22));
    std::normal_distribution<double> noise(0.0, s.noise_sd);
    for (std::size_t i = 0; i < n; ++i) rows.y.row(i)[0] = s.response_mean(rows.x[i][0]) + noise(eng);
    return rows;
}

[[nodiscard]] inline ShiftSample draw_shift(const ShiftScenario& s, std::size_t n_train, std::size_t n_test,
                                            std::uint64_t seed) {
    ShiftSample out;
    out.train = draw_labeled(s.train_x, s, n_train, derive_seed(seed, 1));
    LabeledRows test = draw_labeled(s.test_x, s, n_test, derive_seed(seed, 2));
    out.test_x = std::move(test.x);
    out.test_y_hidden = std::move(test.y);
    return out;
}

// --- uniform deviation over a finite class ------------------------------------------

struct UniformDeviation {
    double sup_deviation = 0.0;  ///< max over the class of |Q1(eta) - int eta dmu0|
    std::vector<double> deviations;
};

/// One data draw and one mu0 cloud shared by every member of the class.
[[nodiscard]] inline UniformDeviation uniform_deviation(const DistributionPair& pair,
                                                        std::span<const EtaFunction> family,
                                                        std::span<const double> targets, std::size_t n, std::size_t m,
                                                        std::uint64_t seed, unsigned threads = 1) {
    if (family.size() != targets.size()) throw std::invalid_argument("uniform_deviation: one target per function");
    if (family.empty()) throw std::invalid_argument("uniform_deviation: empty class");
    const PointSet data = sample_points(pair.mu1, n, derive_seed(seed, streams::data), threads);
    const PointSet mc = sample_points(pair.mu0, m, derive_seed(seed, streams::mu0_samples), threads);
    const NNIndex index(data, derive_seed(seed, streams::ties));
    const VoronoiWeights w = voronoi_weights(index, mc, threads);
    UniformDeviation out;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const double dev = std::abs(q1_estimate(w, data, family[i]).value - targets[i]);
        out.deviations.push_back(dev);
        out.sup_deviation = std::max(out.sup_deviation, dev);
    }
    return out;
}

}  // namespace nnw
