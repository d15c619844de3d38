#include "nomina/classical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "nomina/numerics.hpp"
#include "nomina/parallel.hpp"

namespace nomina {

namespace {

void check_dataset(std::span<const EncodedName> x, std::span<const int> y) {
    if (x.size() != y.size())
        throw ShapeMismatch("classifier fit: " + std::to_string(x.size()) + " feature rows vs " +
                            std::to_string(y.size()) + " labels");
    if (x.empty()) throw EmptySet("classifier fit: empty training set");
    for (int v : y)
        if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 or 1");
}

double gini_from_counts(std::size_t pos, std::size_t n) {
    const double p1 = static_cast<double>(pos) / static_cast<double>(n);
    const double p0 = 1.0 - p1;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
    std::span<const EncodedName> x;
    std::span<const int> y;
    const TreeOptions& opt;
    FlatTree tree;
    std::vector<int> pool;  // feature draw order scratch for subsampled nodes

    int build(std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t n = idx.size();
        std::size_t pos = 0;
        for (std::size_t i : idx) pos += static_cast<std::size_t>(y[i]);
        const double p1 = static_cast<double>(pos) / static_cast<double>(n);

        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, -1, -1, p1});
        if (pos == 0 || pos == n) return node_id;
        if (n < opt.min_samples_split) return node_id;
        if (opt.max_depth != 0 && depth >= opt.max_depth) return node_id;

        const double parent = gini_from_counts(pos, n);
        int best_f = -1;
        double best_dec = -1.0;
        auto consider = [&](int f) {
            std::size_t n1 = 0, pos1 = 0;
            for (std::size_t i : idx) {
                const unsigned c = x[i].cells[static_cast<std::size_t>(f)];
                n1 += c;
                pos1 += c & static_cast<unsigned>(y[i]);
            }
            if (n1 == 0 || n1 == n) return false;  // constant feature, cannot split
            const std::size_t n0 = n - n1, pos0 = pos - pos1;
            const double dec = parent -
                               (static_cast<double>(n0) / n) * gini_from_counts(pos0, n0) -
                               (static_cast<double>(n1) / n) * gini_from_counts(pos1, n1);
            if (dec > best_dec || (dec == best_dec && f < best_f)) {
                best_dec = dec;
                best_f = f;
            }
            return true;
        };

        if (opt.feature_subsample == 0) {
            for (int f = 0; f < static_cast<int>(kFlatLen); ++f) consider(f);
        } else {
            // Partial Fisher-Yates draw without replacement; constants do not
            // count toward the quota, mirroring how exhaustive search would
            // never be blocked by them.
            std::size_t scored = 0;
            for (std::size_t j = 0; j < pool.size() && scored < opt.feature_subsample; ++j) {
                std::swap(pool[j], pool[j + opt.rng->uniform(pool.size() - j)]);
                if (consider(pool[j])) ++scored;
            }
        }
        if (best_f < 0) return node_id;  // every candidate constant

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(n);
        right_idx.reserve(n);
        for (std::size_t i : idx)
            (x[i].cells[static_cast<std::size_t>(best_f)] ? right_idx : left_idx).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)] = {best_f, left, right, p1};
        return node_id;
    }
};

FlatTree build_tree(std::span<const EncodedName> x, std::span<const int> y,
                    std::vector<std::size_t> idx, const TreeOptions& options) {
    if (options.feature_subsample > 0 && options.rng == nullptr)
        throw InvalidArgument("fit_tree: feature subsampling needs a generator");
    TreeBuilder builder{x, y, options, {}, {}};
    if (options.feature_subsample > 0) {
        builder.pool.resize(kFlatLen);
        std::iota(builder.pool.begin(), builder.pool.end(), 0);
    }
    builder.build(idx, 0);
    return std::move(builder.tree);
}

}  // namespace

double gini_impurity(std::span<const int> labels) {
    if (labels.empty()) throw EmptySet("gini_impurity: empty label set");
    std::size_t pos = 0;
    for (int v : labels) pos += static_cast<std::size_t>(v != 0);
    return gini_from_counts(pos, labels.size());
}

double FlatTree::proba(const EncodedName& name) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& nd = nodes[node];
        node = static_cast<std::size_t>(name.cells[static_cast<std::size_t>(nd.feature)] ? nd.right
                                                                                         : nd.left);
    }
    return nodes[node].p1;
}

DecisionTree fit_tree(std::span<const EncodedName> x, std::span<const int> y,
                      const TreeOptions& options) {
    check_dataset(x, y);
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    return DecisionTree(build_tree(x, y, std::move(idx), options));
}

double Forest::predict_proba(const EncodedName& name) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.proba(name);
    return sum / static_cast<double>(trees.size());
}

Forest fit_forest(std::span<const EncodedName> x, std::span<const int> y, ForestKind kind,
                  std::size_t n_trees, std::uint64_t seed) {
    check_dataset(x, y);
    if (n_trees == 0) throw InvalidArgument("fit_forest: n_trees must be positive");

    const auto k_sub =
        static_cast<std::size_t>(std::sqrt(static_cast<double>(kFlatLen)));  // 23
    std::vector<FlatTree> trees(n_trees);
    parallel_for(n_trees, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng(seed + t);
            TreeOptions options;
            options.feature_subsample = k_sub;
            options.rng = &rng;
            std::vector<std::size_t> idx(x.size());
            if (kind == ForestKind::RandomForest) {
                for (auto& i : idx) i = rng.uniform(x.size());
            } else {
                std::iota(idx.begin(), idx.end(), 0);
            }
            trees[t] = build_tree(x, y, std::move(idx), options);
        }
    });
    return Forest(kind, std::move(trees));
}

NaiveBayes::NaiveBayes(Matrix log_like0, Matrix log_like1, double log_prior0, double log_prior1)
    : log_likelihood{std::move(log_like0), std::move(log_like1)},
      log_prior{log_prior0, log_prior1} {}

double NaiveBayes::predict_proba(const EncodedName& name) const {
    double lp[2];
    for (int c = 0; c < 2; ++c) {
        lp[c] = log_prior[c];
        for (std::size_t row = 0; row < kMaxNameLen; ++row)
            lp[c] += log_likelihood[c](row, name.symbol_index(row));
    }
    const double m = std::max(lp[0], lp[1]);
    const double e0 = std::exp(lp[0] - m), e1 = std::exp(lp[1] - m);
    return e1 / (e0 + e1);
}

NaiveBayes fit_naive_bayes(std::span<const EncodedName> x, std::span<const int> y, double alpha) {
    check_dataset(x, y);
    if (alpha <= 0.0) throw InvalidArgument("fit_naive_bayes: alpha must be positive");

    Matrix counts[2] = {Matrix(kMaxNameLen, kVocabSize), Matrix(kMaxNameLen, kVocabSize)};
    std::size_t nc[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int c = y[i];
        ++nc[c];
        for (std::size_t row = 0; row < kMaxNameLen; ++row)
            counts[c](row, x[i].symbol_index(row)) += 1.0;
    }
    for (int c = 0; c < 2; ++c) {
        const double denom = static_cast<double>(nc[c]) + alpha * static_cast<double>(kVocabSize);
        for (double& v : counts[c].values()) v = std::log((v + alpha) / denom);
    }
    const auto n = static_cast<double>(x.size());
    return NaiveBayes(std::move(counts[0]), std::move(counts[1]),
                      std::log(static_cast<double>(nc[0]) / n),
                      std::log(static_cast<double>(nc[1]) / n));
}

PackedBits pack_bits(const EncodedName& name) {
    PackedBits w{};
    for (std::size_t j = 0; j < kFlatLen; ++j)
        if (name.cells[j]) w[j >> 6] |= std::uint64_t{1} << (j & 63);
    return w;
}

Knn::Knn(std::vector<PackedBits> bits, std::vector<int> labels, std::size_t k)
    : bits(std::move(bits)), labels(std::move(labels)), k(k) {
    if (k == 0) throw InvalidArgument("knn: k must be positive");
}

double Knn::predict_proba(const EncodedName& name) const {
    if (bits.size() < k)
        throw TooFewNeighbors("knn: " + std::to_string(bits.size()) + " training points < k = " +
                              std::to_string(k));
    const PackedBits q = pack_bits(name);

    // Top-k by (distance, index); scanning in index order makes the strict
    // comparison below break distance ties toward lower training indices.
    std::vector<std::pair<int, std::size_t>> best;
    best.reserve(k);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        int dist = 0;
        for (std::size_t w = 0; w < kPackedWords; ++w)
            dist += std::popcount(bits[i][w] ^ q[w]);
        if (best.size() == k && dist >= best.back().first) continue;
        auto it = best.begin();
        while (it != best.end() && it->first <= dist) ++it;
        best.insert(it, {dist, i});
        if (best.size() > k) best.pop_back();
    }
    std::size_t votes = 0;
    for (const auto& [d, i] : best) votes += static_cast<std::size_t>(labels[i]);
    return static_cast<double>(votes) / static_cast<double>(k);
}

Knn fit_knn(std::span<const EncodedName> x, std::span<const int> y, std::size_t k) {
    check_dataset(x, y);
    if (x.size() < k)
        throw TooFewNeighbors("fit_knn: " + std::to_string(x.size()) + " training points < k = " +
                              std::to_string(k));
    std::vector<PackedBits> bits;
    bits.reserve(x.size());
    for (const auto& e : x) bits.push_back(pack_bits(e));
    return Knn(std::move(bits), std::vector<int>(y.begin(), y.end()), k);
}

double knn_predict(std::span<const EncodedName> x_train, std::span<const int> y_train,
                   const EncodedName& query, std::size_t k) {
    return fit_knn(x_train, y_train, k).predict_proba(query);
}

namespace {

/// Flattened indices of the 20 hot cells of a name.
std::array<std::uint16_t, kMaxNameLen> hot_indices(const EncodedName& name) {
    std::array<std::uint16_t, kMaxNameLen> out;
    for (std::size_t row = 0; row < kMaxNameLen; ++row)
        out[row] = static_cast<std::uint16_t>(row * kVocabSize + name.symbol_index(row));
    return out;
}

}  // namespace

double Logistic::predict_proba(const EncodedName& name) const {
    double z = bias;
    for (std::uint16_t f : hot_indices(name)) z += weights[f];
    return sigmoid(z);
}

Logistic fit_logistic(std::span<const EncodedName> x, std::span<const int> y,
                      const LogisticOptions& options) {
    check_dataset(x, y);
    if (options.tol <= 0.0 || options.lambda < 0.0)
        throw InvalidArgument("fit_logistic: tol must be positive and lambda nonnegative");

    const std::size_t n = x.size();
    std::vector<std::array<std::uint16_t, kMaxNameLen>> feats;
    feats.reserve(n);
    for (const auto& e : x) feats.push_back(hot_indices(e));

    // Objective Σᵢ [softplus(zᵢ) − yᵢ zᵢ] + (λ/2)‖w‖², the log-sum-exp form of
    // summed BCE; numerically safe without probability clipping.
    auto eval = [&](const std::vector<double>& wv, double bv, std::vector<double>* probs) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = bv;
            for (std::uint16_t f : feats[i]) z += wv[f];
            loss += softplus(z) - y[i] * z;
            if (probs) (*probs)[i] = sigmoid(z);
        }
        double sq = 0.0;
        for (double v : wv) sq += v * v;
        return loss + 0.5 * options.lambda * sq;
    };

    std::vector<double> w(kFlatLen, 0.0), wt(kFlatLen), gw(kFlatLen);
    std::vector<double> p(n), pt(n);
    double b = 0.0, gb = 0.0;
    double loss = eval(w, b, &p);
    double step = 1.0;
    double gnorm = std::numeric_limits<double>::infinity();
    std::size_t iter = 0;

    for (; iter < options.max_iters; ++iter) {
        std::fill(gw.begin(), gw.end(), 0.0);
        gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = p[i] - y[i];
            for (std::uint16_t f : feats[i]) gw[f] += d;
            gb += d;
        }
        double g2 = gb * gb;
        gnorm = std::abs(gb);
        for (std::size_t j = 0; j < kFlatLen; ++j) {
            gw[j] += options.lambda * w[j];
            g2 += gw[j] * gw[j];
            gnorm = std::max(gnorm, std::abs(gw[j]));
        }
        if (gnorm < options.tol) break;

        step *= 2.0;
        while (true) {
            for (std::size_t j = 0; j < kFlatLen; ++j) wt[j] = w[j] - step * gw[j];
            const double bt = b - step * gb;
            const double lt = eval(wt, bt, &pt);
            if (lt <= loss - 1e-4 * step * g2) {
                w.swap(wt);
                b = bt;
                p.swap(pt);
                loss = lt;
                break;
            }
            step *= 0.5;
            if (step < 1e-20)
                throw Diverged("fit_logistic: line search failed at iteration " +
                               std::to_string(iter + 1));
        }
    }

    Logistic out(std::move(w), b);
    out.iterations = iter;
    out.final_grad_norm = gnorm;
    return out;
}

std::vector<double> cg_solve(const Matrix& a, std::span<const double> b, double tol,
                             std::size_t max_iters) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw ShapeMismatch("cg_solve: system must be square and match the right-hand side");
    if (tol <= 0.0) throw InvalidArgument("cg_solve: tol must be positive");

    std::vector<double> x(n, 0.0), r(b.begin(), b.end()), z(n), p(n), ap(n), diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i) > 0.0 ? a(i, i) : 1.0;
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    auto rnorm = [&] {
        return std::sqrt(std::inner_product(r.begin(), r.end(), r.begin(), 0.0));
    };

    for (std::size_t it = 0; it <= max_iters; ++it) {
        if (rnorm() < tol) return x;
        if (it == max_iters) break;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = a.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * p[j];
            ap[i] = s;
        }
        const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
        if (pap <= 0.0) throw NoConvergence("cg_solve: matrix is not positive definite");
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_next = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_next / rz;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_next;
    }
    throw NoConvergence("cg_solve: residual above " + std::to_string(tol) + " after " +
                        std::to_string(max_iters) + " iterations");
}

std::vector<double> ridge_solve(const Matrix& x, std::span<const double> y, double alpha,
                                double tol) {
    if (x.rows() != y.size()) throw ShapeMismatch("ridge_solve: row/label count mismatch");
    if (x.rows() == 0) throw EmptySet("ridge_solve: empty system");
    Matrix g = matmul(x, x, true, false);
    for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += alpha;
    Matrix yv(y.size(), 1, std::vector<double>(y.begin(), y.end()));
    const Matrix bv = matmul(x, yv, true, false);
    return cg_solve(g, std::span<const double>(bv.data(), bv.rows()), tol, 10 * g.rows());
}

double Ridge::predict_proba(const EncodedName& name) const {
    double margin = 0.0;
    for (std::uint16_t f : hot_indices(name)) margin += weights[f];
    return sigmoid(margin);
}

Ridge fit_ridge(std::span<const EncodedName> x, std::span<const int> y, double tol,
                double alpha) {
    check_dataset(x, y);
    Matrix g(kFlatLen, kFlatLen);
    std::vector<double> bv(kFlatLen, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto idx = hot_indices(x[i]);
        const double ypm = y[i] ? 1.0 : -1.0;
        for (std::uint16_t fa : idx) {
            bv[fa] += ypm;
            double* row = g.row(fa);
            for (std::uint16_t fb : idx) row[fb] += 1.0;
        }
    }
    for (std::size_t i = 0; i < kFlatLen; ++i) g(i, i) += alpha;
    return Ridge(cg_solve(g, bv, tol, 10 * kFlatLen));
}

std::vector<int> label_ints(const Corpus& corpus) {
    std::vector<int> y(corpus.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = corpus.records[i].gender;
    return y;
}

}  // namespace nomina
