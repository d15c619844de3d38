#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nomina/corpus.hpp"
#include "nomina/encoder.hpp"
#include "nomina/matrix.hpp"
#include "nomina/rng.hpp"

namespace nomina {

/// Shared classifier contract: probability of label 1 (male) with the 0.5
/// threshold, so predict(x) = 1 ⟺ predict_proba(x) ≥ 0.5. Fitted models are
/// immutable; predict paths are const and thread-safe.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual double predict_proba(const EncodedName& name) const = 0;

    int predict(const EncodedName& name) const { return predict_proba(name) >= 0.5 ? 1 : 0; }
};

/// 1 − p₀² − p₁² over a nonempty binary label set.
double gini_impurity(std::span<const int> labels);

/// Flat array-of-nodes binary tree over the 560 flattened one-hot features.
/// feature < 0 marks a leaf carrying P(label = 1); internal nodes route
/// feature value 0 left and 1 right.
struct FlatTree {
    struct Node {
        int feature = -1;
        int left = -1;
        int right = -1;
        double p1 = 0.0;
    };
    std::vector<Node> nodes;

    double proba(const EncodedName& name) const;
};

struct TreeOptions {
    std::size_t max_depth = 0;          // 0 = unlimited
    std::size_t min_samples_split = 2;
    std::size_t feature_subsample = 0;  // 0 = score every feature
    Rng* rng = nullptr;                 // required when feature_subsample > 0
};

class DecisionTree : public Classifier {
public:
    explicit DecisionTree(FlatTree tree) : tree(std::move(tree)) {}

    double predict_proba(const EncodedName& name) const override { return tree.proba(name); }

    FlatTree tree;
};

/// Greedy recursive partitioning maximizing Gini decrease. Candidate features
/// whose values are constant in the node cannot split and are skipped; ties
/// break toward the lowest feature index. Zero-decrease splits are taken when
/// a valid candidate exists, which lets XOR-like label rules resolve deeper.
DecisionTree fit_tree(std::span<const EncodedName> x, std::span<const int> y,
                      const TreeOptions& options = {});

enum class ForestKind { RandomForest, ExtraTrees };

class Forest : public Classifier {
public:
    Forest(ForestKind kind, std::vector<FlatTree> trees)
        : kind(kind), trees(std::move(trees)) {}

    double predict_proba(const EncodedName& name) const override;

    ForestKind kind;
    std::vector<FlatTree> trees;
};

/// random_forest: bootstrap resample per tree; extra_trees: full data per
/// tree. Both score ⌊√560⌋ = 23 random candidate features per node. Tree i
/// derives its generator from seed + i, so fitting parallelizes without
/// changing results.
Forest fit_forest(std::span<const EncodedName> x, std::span<const int> y, ForestKind kind,
                  std::size_t n_trees = 100, std::uint64_t seed = 0);

/// Categorical naive Bayes over 20 positions × 28 symbols with additive
/// (Laplace) smoothing. Likelihoods and priors are kept in log space.
class NaiveBayes : public Classifier {
public:
    NaiveBayes(Matrix log_like0, Matrix log_like1, double log_prior0, double log_prior1);

    double predict_proba(const EncodedName& name) const override;

    Matrix log_likelihood[2];  // [position × symbol]
    double log_prior[2];
};

NaiveBayes fit_naive_bayes(std::span<const EncodedName> x, std::span<const int> y,
                           double alpha = 1.0);

inline constexpr std::size_t kPackedWords = (kFlatLen + 63) / 64;
using PackedBits = std::array<std::uint64_t, kPackedWords>;

PackedBits pack_bits(const EncodedName& name);

/// k-nearest-neighbor vote under Euclidean distance, which on binary one-hot
/// rows equals Hamming distance and is computed by popcount over packed
/// words. Distance ties break toward the lower training index.
class Knn : public Classifier {
public:
    Knn(std::vector<PackedBits> bits, std::vector<int> labels, std::size_t k);

    double predict_proba(const EncodedName& name) const override;

    std::vector<PackedBits> bits;
    std::vector<int> labels;
    std::size_t k;
};

Knn fit_knn(std::span<const EncodedName> x, std::span<const int> y, std::size_t k = 5);

/// One-shot form of the neighbor vote; packs the training set per call.
double knn_predict(std::span<const EncodedName> x_train, std::span<const int> y_train,
                   const EncodedName& query, std::size_t k = 5);

struct LogisticOptions {
    double tol = 1e-4;       // stop when ‖∇‖∞ < tol
    double lambda = 1.0;     // L2 strength; objective Σᵢ BCEᵢ + (λ/2)‖w‖²
    std::size_t max_iters = 10000;
};

class Logistic : public Classifier {
public:
    Logistic(std::vector<double> weights, double bias)
        : weights(std::move(weights)), bias(bias) {}

    double predict_proba(const EncodedName& name) const override;

    std::vector<double> weights;  // 560
    double bias = 0.0;
    std::size_t iterations = 0;
    double final_grad_norm = 0.0;
};

/// Full-batch gradient descent with a backtracking (Armijo) line search whose
/// step doubles between iterations. The bias is not penalized.
Logistic fit_logistic(std::span<const EncodedName> x, std::span<const int> y,
                      const LogisticOptions& options = {});

/// Jacobi-preconditioned conjugate gradient for a dense SPD system, run to
/// absolute residual ‖Ax − b‖ < tol. Throws NoConvergence past max_iters.
std::vector<double> cg_solve(const Matrix& a, std::span<const double> b, double tol,
                             std::size_t max_iters);

/// Solves (XᵀX + αI)w = Xᵀy for dense features; the testable core of ridge.
std::vector<double> ridge_solve(const Matrix& x, std::span<const double> y, double alpha,
                                double tol);

class Ridge : public Classifier {
public:
    explicit Ridge(std::vector<double> weights) : weights(std::move(weights)) {}

    double predict_proba(const EncodedName& name) const override;  // σ(x·w)

    std::vector<double> weights;  // 560, no intercept term
};

/// Least-squares classifier on ±1 targets via the normal equations, solved by
/// conjugate gradient (iteration cap 10·560).
Ridge fit_ridge(std::span<const EncodedName> x, std::span<const int> y, double tol = 1e-3,
                double alpha = 1.0);

/// Corpus labels as ints in {0, 1}.
std::vector<int> label_ints(const Corpus& corpus);

}  // namespace nomina
