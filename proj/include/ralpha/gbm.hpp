#pragma once

// Gradient-boosted regression trees for binary classification (second-order
// logistic boosting with regularized leaf weights), plus logistic,
// Gaussian naive-Bayes, random-forest and majority-class baselines, with
// classification metrics and seeded k-fold cross-validation.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ralpha/common.hpp"

namespace ralpha {

// dense row-major numeric matrix
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    Matrix select_rows(const std::vector<std::size_t>& idx) const;
    Matrix select_cols(const std::vector<std::size_t>& idx) const;
};

struct GbmConfig {
    int n_rounds = 200;
    int max_depth = 4;
    double learning_rate = 0.1;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double lambda = 1.0;            // leaf L2
    double gamma = 0.0;             // split penalty
    double subsample = 0.8;
    double colsample = 0.8;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 for leaves
    double threshold = 0.0;     // go left when x[feature] < threshold
    std::int32_t left = -1, right = -1;
    double weight = 0.0;  // leaf output (unscaled by learning rate)
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double predict(const double* row) const;
};

// Fits one regression tree to (gradient, hessian) statistics: leaf weight
// -G/(H+lambda), split gain 0.5*[GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma.
// `sorted_cols[j]` holds row indices ordered by feature j (ties by row index).
// Only rows with row_weight > 0 contribute statistics; every row is routed.
// Ties in the split search break toward the lowest feature index, then the
// lowest threshold.
Tree build_tree(const Matrix& X, const std::vector<double>& grad, const std::vector<double>& hess,
                const std::vector<std::uint8_t>& row_in_sample,
                const std::vector<std::size_t>& feature_subset,
                const std::vector<std::vector<std::uint32_t>>& sorted_cols, int max_depth,
                double lambda, double gamma, double min_child_weight, int threads,
                std::vector<std::int32_t>* leaf_of_row = nullptr,
                std::vector<double>* feature_gain = nullptr);

std::vector<std::vector<std::uint32_t>> presort_columns(const Matrix& X, int threads);

class GbmModel {
public:
    GbmModel() = default;

    std::vector<double> predict_proba(const Matrix& X) const;
    std::vector<double> predict_score(const Matrix& X) const;  // log-odds
    std::vector<int> predict_label(const Matrix& X) const;     // p >= 0.5

    double base_score = 0.0;  // log-odds prior
    double learning_rate = 0.1;
    std::size_t n_features = 0;
    std::vector<Tree> trees;
    GbmConfig config;
    std::vector<double> train_loss;  // mean logistic loss after each round

    // split-gain totals per feature, for importance reports
    std::vector<double> gain_importance;

    void dump(std::ostream& out) const;  // versioned JSON
    static GbmModel load(std::istream& in);
};

// logistic loss plumbing (exposed for the finite-difference checks)
double sigmoid(double x);
double logistic_loss(double y, double score);
double logistic_grad(double y, double score);  // d loss / d score = p - y
double logistic_hess(double y, double score);  // p (1 - p)

GbmModel train_gbm(const Matrix& X, const std::vector<int>& y, const GbmConfig& config);

// ---------------------------------------------------------------------------
// metrics

struct EvalMetrics {
    double accuracy = 0;
    double precision = 0;  // undefined marker when no predicted positives
    double recall = 0;     // undefined marker when no actual positives
    double f_measure = 0;  // undefined marker when precision+recall degenerate
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t n() const { return tp + fp + tn + fn; }
};

EvalMetrics evaluate(const std::vector<int>& predicted, const std::vector<int>& truth);

// ---------------------------------------------------------------------------
// baseline learners

struct LogisticConfig {
    int iterations = 400;
    double learning_rate = 0.5;
    double l2 = 1e-4;
};

struct RandomForestConfig {
    int n_trees = 60;
    int max_depth = 10;
    double colsample = 0.0;  // 0 -> sqrt(d)/d
    std::uint64_t seed = 0;
    int threads = 1;
};

struct GaussianNbConfig {
    double variance_floor_ratio = 1e-9;  // floor = ratio * max feature variance + 1e-12
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::vector<double> predict_proba(const Matrix& X) const = 0;
    std::vector<int> predict_label(const Matrix& X) const;
};

enum class LearnerKind { Gbm, Logistic, GaussianNb, RandomForest, Majority };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::Gbm;
    std::string name = "xgb";
    GbmConfig gbm;
    LogisticConfig logistic;
    RandomForestConfig forest;
    GaussianNbConfig nb;
};

// named presets: xgb, gradient_boosting, logistic, random_forest,
// gaussian_nb, majority
LearnerSpec learner_preset(const std::string& name);

std::unique_ptr<Classifier> train_learner(const LearnerSpec& spec, const Matrix& X,
                                          const std::vector<int>& y, std::uint64_t seed,
                                          int threads);

// ---------------------------------------------------------------------------
// cross-validation

struct FoldMetrics {
    int fold = 0;
    EvalMetrics metrics;
    bool degenerate = false;  // training side had a single class; excluded from means
};

struct CvResult {
    std::vector<FoldMetrics> folds;
    EvalMetrics mean;      // over non-degenerate folds
    double mean_accuracy = 0;
    int degenerate_folds = 0;
};

// Seeded shuffle ("fold-shuffle" sub-stream), k near-equal folds. With
// stratify, the shuffle happens within each class before interleaving.
std::vector<int> make_folds(std::size_t n, int k, const std::vector<int>& y, std::uint64_t seed,
                            bool stratify);

CvResult kfold_cv(const Matrix& X, const std::vector<int>& y, int k, const LearnerSpec& learner,
                  std::uint64_t seed, int threads = 1, bool stratify = false);

}  // namespace ralpha
