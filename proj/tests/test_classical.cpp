#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "nomina/classical.hpp"
#include "nomina/corpus.hpp"
#include "nomina/encoder.hpp"
#include "nomina/matrix.hpp"
#include "nomina/rng.hpp"

using namespace nomina;

namespace {

std::string random_name(Rng& rng, std::size_t min_len = 2, std::size_t max_len = 10) {
    const std::size_t len = min_len + rng.uniform(max_len - min_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += static_cast<char>('A' + rng.uniform(26));
    return s;
}

std::size_t hamming(const EncodedName& a, const EncodedName& b) {
    std::size_t d = 0;
    for (std::size_t j = 0; j < kFlatLen; ++j) d += a.cells[j] != b.cells[j];
    return d;
}

bool trees_equal(const FlatTree& a, const FlatTree& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
        if (a.nodes[i].feature != b.nodes[i].feature || a.nodes[i].left != b.nodes[i].left ||
            a.nodes[i].right != b.nodes[i].right || a.nodes[i].p1 != b.nodes[i].p1)
            return false;
    return true;
}

}  // namespace

TEST_CASE("gini impurity on hand cases") {
    CHECK(gini_impurity(std::vector<int>{0, 0, 0}) == 0.0);
    CHECK(gini_impurity(std::vector<int>{1, 1}) == 0.0);
    CHECK(gini_impurity(std::vector<int>{0, 1}) == 0.5);
    CHECK(gini_impurity(std::vector<int>{0, 0, 1}) ==
          doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK_THROWS_AS(gini_impurity(std::vector<int>{}), EmptySet);
}

TEST_CASE("a single informative letter yields a depth-one tree") {
    // first letter determines the label, so cells (0,'A') and (0,'B') both
    // split perfectly and the tie resolves to the lower feature index
    std::vector<EncodedName> x;
    std::vector<int> y;
    for (const char* name : {"AJA", "AKO", "ALU", "BJA", "BKO", "BLU"}) {
        x.push_back(encode(name));
        y.push_back(name[0] == 'B' ? 1 : 0);
    }
    const DecisionTree tree = fit_tree(x, y);
    REQUIRE(tree.tree.nodes.size() == 3);
    CHECK(tree.tree.nodes[0].feature == 0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(tree.predict(x[i]) == y[i]);
}

TEST_CASE("zero-decrease splits let the tree solve xor labels") {
    // label = (first letter == B) xor (second letter == B); no single feature
    // lowers impurity at the root
    std::vector<EncodedName> x;
    std::vector<int> y;
    for (const char* name : {"AA", "AB", "BA", "BB"}) {
        x.push_back(encode(name));
        y.push_back(((name[0] == 'B') ^ (name[1] == 'B')) ? 1 : 0);
    }
    const DecisionTree tree = fit_tree(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(tree.predict(x[i]) == y[i]);
}

TEST_CASE("max depth and min samples stop growth") {
    std::vector<EncodedName> x;
    std::vector<int> y;
    for (const char* name : {"AA", "AB", "BA", "BB"}) {
        x.push_back(encode(name));
        y.push_back(((name[0] == 'B') ^ (name[1] == 'B')) ? 1 : 0);
    }
    TreeOptions depth_one;
    depth_one.max_depth = 1;
    const DecisionTree stump = fit_tree(x, y, depth_one);
    CHECK(stump.tree.nodes.size() == 3);  // root plus two leaves, xor unsolved

    TreeOptions coarse;
    coarse.min_samples_split = 5;
    const DecisionTree leaf = fit_tree(x, y, coarse);
    CHECK(leaf.tree.nodes.size() == 1);
    CHECK(leaf.tree.nodes[0].feature == -1);
    CHECK(leaf.tree.nodes[0].p1 == 0.5);
}

TEST_CASE("root splits equal an exhaustive gini search on small instances") {
    Rng rng(41);
    int split_cases = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.uniform(9);  // up to 10 points
        const std::size_t d = 1 + rng.uniform(5);  // up to 5 live features
        std::vector<EncodedName> x(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < d; ++f)
                x[i].cells[f] = static_cast<std::uint8_t>(rng.uniform(2));
            y[i] = static_cast<int>(rng.uniform(2));
        }
        const DecisionTree tree = fit_tree(x, y);
        const FlatTree::Node& root = tree.tree.nodes[0];

        std::size_t pos = 0;
        for (int v : y) pos += static_cast<std::size_t>(v);
        if (pos == 0 || pos == n) {
            CHECK(root.feature == -1);
            continue;
        }
        const auto gini = [](std::size_t p, std::size_t m) {
            const double p1 = static_cast<double>(p) / static_cast<double>(m);
            const double p0 = 1.0 - p1;
            return 1.0 - p0 * p0 - p1 * p1;
        };
        const double parent = gini(pos, n);
        int want = -1;
        double best = -1.0;
        for (std::size_t f = 0; f < d; ++f) {
            std::size_t n1 = 0, pos1 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!x[i].cells[f]) continue;
                ++n1;
                pos1 += static_cast<std::size_t>(y[i]);
            }
            if (n1 == 0 || n1 == n) continue;
            const std::size_t n0 = n - n1, pos0 = pos - pos1;
            const double dec = parent - (static_cast<double>(n0) / n) * gini(pos0, n0) -
                               (static_cast<double>(n1) / n) * gini(pos1, n1);
            if (dec > best) {
                best = dec;
                want = static_cast<int>(f);
            }
        }
        CHECK(root.feature == want);
        if (want >= 0) ++split_cases;
    }
    CHECK(split_cases > 100);  // the sweep actually exercised splits
}

TEST_CASE("tree fitting validates its dataset and options") {
    std::vector<EncodedName> x;
    std::vector<int> y;
    CHECK_THROWS_AS(fit_tree(x, y), EmptySet);
    x.push_back(encode("ANA"));
    y = {0, 1};
    CHECK_THROWS_AS(fit_tree(x, y), ShapeMismatch);
    y = {2};
    CHECK_THROWS_AS(fit_tree(x, y), InvalidArgument);
    y = {1};
    TreeOptions no_rng;
    no_rng.feature_subsample = 5;
    CHECK_THROWS_AS(fit_tree(x, y, no_rng), InvalidArgument);
}

TEST_CASE("forests are deterministic in the seed and average their trees") {
    const Corpus corpus = synth_corpus(150, 43);
    const std::vector<EncodedName> x = encode_corpus(corpus);
    const std::vector<int> y = label_ints(corpus);

    const Forest a = fit_forest(x, y, ForestKind::RandomForest, 12, 7);
    const Forest b = fit_forest(x, y, ForestKind::RandomForest, 12, 7);
    REQUIRE(a.trees.size() == 12);
    REQUIRE(b.trees.size() == 12);
    for (std::size_t t = 0; t < 12; ++t) CHECK(trees_equal(a.trees[t], b.trees[t]));

    const EncodedName q = encode("BULOVA");
    double sum = 0.0;
    for (const FlatTree& tree : a.trees) sum += tree.proba(q);
    CHECK(a.predict_proba(q) == sum / 12.0);

    const Forest c = fit_forest(x, y, ForestKind::RandomForest, 12, 8);
    bool all_same = true;
    for (std::size_t t = 0; t < 12 && all_same; ++t)
        all_same = trees_equal(a.trees[t], c.trees[t]);
    CHECK(!all_same);

    CHECK_THROWS_AS(fit_forest(x, y, ForestKind::RandomForest, 0, 7), InvalidArgument);
}

TEST_CASE("extra trees see the full sample while random forest bootstraps") {
    // all features constant: every tree is a single leaf holding the class
    // share of its training sample, so extra trees reproduce 3/8 exactly
    // while bootstrap resamples drift
    std::vector<EncodedName> x(8);
    const std::vector<int> y = {1, 1, 1, 0, 0, 0, 0, 0};

    const Forest et = fit_forest(x, y, ForestKind::ExtraTrees, 15, 3);
    for (const FlatTree& tree : et.trees) {
        REQUIRE(tree.nodes.size() == 1);
        CHECK(tree.nodes[0].p1 == 0.375);
    }
    CHECK(et.predict_proba(x[0]) == 0.375);

    const Forest rf = fit_forest(x, y, ForestKind::RandomForest, 15, 3);
    bool any_resampled = false;
    for (const FlatTree& tree : rf.trees) {
        REQUIRE(tree.nodes.size() == 1);
        any_resampled = any_resampled || tree.nodes[0].p1 != 0.375;
    }
    CHECK(any_resampled);
}

TEST_CASE("packed bits mirror the flattened one-hot layout") {
    const EncodedName enc = encode("AB");
    const PackedBits bits = pack_bits(enc);
    const auto flat = flatten(enc);
    for (std::size_t j = 0; j < kFlatLen; ++j) {
        const bool bit = (bits[j >> 6] >> (j & 63)) & 1;
        CHECK(bit == (flat[j] != 0));
    }
}

TEST_CASE("knn equals a full-sort brute-force oracle") {
    Rng rng(47);
    std::vector<EncodedName> x;
    std::vector<int> y;
    std::set<std::string> seen;
    while (x.size() < 200) {
        const std::string name = random_name(rng);
        if (!seen.insert(name).second) continue;
        x.push_back(encode(name));
        y.push_back(static_cast<int>(rng.uniform(2)));
    }
    for (const std::size_t k : {1UL, 3UL, 5UL, 7UL}) {
        const Knn model = fit_knn(x, y, k);
        for (int trial = 0; trial < 20; ++trial) {
            const EncodedName q = encode(random_name(rng));
            std::vector<std::pair<std::size_t, std::size_t>> order;  // (distance, index)
            for (std::size_t i = 0; i < x.size(); ++i)
                order.emplace_back(hamming(x[i], q), i);
            std::sort(order.begin(), order.end());
            std::size_t votes = 0;
            for (std::size_t i = 0; i < k; ++i)
                votes += static_cast<std::size_t>(y[order[i].second]);
            CHECK(model.predict_proba(q) ==
                  static_cast<double>(votes) / static_cast<double>(k));
        }
    }
}

TEST_CASE("knn distance ties break toward the lower training index") {
    const std::vector<EncodedName> x = {encode("AB"), encode("AC")};
    // AD sits two cells from both neighbors
    CHECK(knn_predict(x, std::vector<int>{1, 0}, encode("AD"), 1) == 1.0);
    CHECK(knn_predict(x, std::vector<int>{0, 1}, encode("AD"), 1) == 0.0);
}

TEST_CASE("knn with k equal to the whole set returns the label share") {
    Rng rng(53);
    std::vector<EncodedName> x;
    std::vector<int> y;
    std::set<std::string> seen;
    while (x.size() < 200) {
        const std::string name = random_name(rng);
        if (!seen.insert(name).second) continue;
        x.push_back(encode(name));
        y.push_back(x.size() <= 120 ? 1 : 0);
    }
    const Knn model = fit_knn(x, y, 200);
    CHECK(model.predict_proba(encode("ZZZ")) == 120.0 / 200.0);
}

TEST_CASE("knn refuses k larger than the training set or zero") {
    const std::vector<EncodedName> x = {encode("AB"), encode("AC")};
    const std::vector<int> y = {1, 0};
    CHECK_THROWS_AS(fit_knn(x, y, 5), TooFewNeighbors);
    CHECK_THROWS_AS(fit_knn(x, y, 0), InvalidArgument);
}

TEST_CASE("naive bayes posterior matches the smoothed hand computation") {
    const std::vector<EncodedName> x = {encode("AA"), encode("AB"), encode("BA"),
                                        encode("BB")};
    const std::vector<int> y = {0, 0, 1, 1};
    const NaiveBayes model = fit_naive_bayes(x, y, 1.0);

    const EncodedName q = encode("AA");
    double lp[2];
    for (int c = 0; c < 2; ++c) {
        lp[c] = std::log(0.5);  // two of four records per class
        for (std::size_t row = 0; row < kMaxNameLen; ++row) {
            const std::size_t sym = q.symbol_index(row);
            double count = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                if (y[i] == c && x[i].symbol_index(row) == sym) count += 1.0;
            lp[c] += std::log((count + 1.0) / (2.0 + 28.0));
        }
    }
    const double want = std::exp(lp[1]) / (std::exp(lp[0]) + std::exp(lp[1]));
    CHECK(model.predict_proba(q) == doctest::Approx(want).epsilon(1e-12));
    CHECK(model.predict(q) == 0);
}

TEST_CASE("naive bayes gives an unseen class zero mass") {
    const std::vector<EncodedName> x = {encode("ANA"), encode("OLA"), encode("IDA")};
    const std::vector<int> y = {0, 0, 0};
    const NaiveBayes model = fit_naive_bayes(x, y);
    CHECK(model.predict_proba(encode("ANA")) == 0.0);
}

TEST_CASE("naive bayes rejects a non-positive smoothing constant") {
    const std::vector<EncodedName> x = {encode("ANA"), encode("IVO")};
    const std::vector<int> y = {0, 1};
    CHECK_THROWS_AS(fit_naive_bayes(x, y, 0.0), InvalidArgument);
    CHECK_THROWS_AS(fit_naive_bayes(x, y, -1.0), InvalidArgument);
}

TEST_CASE("logistic regression separates the synthetic rule") {
    const Corpus corpus = synth_corpus(120, 59);
    const std::vector<EncodedName> x = encode_corpus(corpus);
    const std::vector<int> y = label_ints(corpus);
    const Logistic model = fit_logistic(x, y);
    CHECK(model.final_grad_norm < 1e-4);
    CHECK(model.iterations > 0);
    // the default L2 penalty trades a little training accuracy for margin
    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        correct += static_cast<std::size_t>(model.predict(x[i]) == y[i]);
    CHECK(correct >= x.size() * 98 / 100);
}

TEST_CASE("unpenalized logistic regression drives separable loss toward zero") {
    std::vector<EncodedName> x;
    std::vector<int> y;
    for (const char* name : {"ABO", "AKU", "AZO", "BBO", "BKU", "BZO"}) {
        x.push_back(encode(name));
        y.push_back(name[0] == 'B' ? 1 : 0);
    }
    LogisticOptions options;
    options.lambda = 0.0;
    options.tol = 1e-3;
    const Logistic model = fit_logistic(x, y, options);
    double bce = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = model.predict_proba(x[i]);
        bce -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    CHECK(bce / static_cast<double>(x.size()) < 0.01);
    // the discriminative first-letter weights carry opposite signs
    CHECK(model.weights[1] > 0.0);  // cell (0,'B')
    CHECK(model.weights[0] < 0.0);  // cell (0,'A')
}

TEST_CASE("logistic regression rejects bad options") {
    const std::vector<EncodedName> x = {encode("ANA"), encode("IVO")};
    const std::vector<int> y = {0, 1};
    LogisticOptions bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(fit_logistic(x, y, bad_tol), InvalidArgument);
    LogisticOptions bad_lambda;
    bad_lambda.lambda = -1.0;
    CHECK_THROWS_AS(fit_logistic(x, y, bad_lambda), InvalidArgument);
}

TEST_CASE("conjugate gradient solves hand-checked spd systems") {
    const Matrix identity(2, 2, {1, 0, 0, 1});
    const std::vector<double> x = cg_solve(identity, std::vector<double>{3.0, -2.0}, 1e-12, 10);
    CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-10));

    // {{4,1},{1,3}} w = {1,2} has the exact solution {1/11, 7/11}
    const Matrix a(2, 2, {4, 1, 1, 3});
    const std::vector<double> w = cg_solve(a, std::vector<double>{1.0, 2.0}, 1e-12, 10);
    CHECK(w[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-9));
}

TEST_CASE("conjugate gradient reports indefinite systems and iteration caps") {
    // p'Ap vanishes on the first direction of this indefinite system
    const Matrix indefinite(2, 2, {1, 0, 0, -1});
    CHECK_THROWS_AS(cg_solve(indefinite, std::vector<double>{1.0, 1.0}, 1e-10, 50),
                    NoConvergence);

    const Matrix a(2, 2, {4, 1, 1, 3});
    CHECK_THROWS_AS(cg_solve(a, std::vector<double>{1.0, 2.0}, 1e-30, 1), NoConvergence);
    CHECK_THROWS_AS(cg_solve(a, std::vector<double>{1.0, 2.0}, 0.0, 10), InvalidArgument);
    CHECK_THROWS_AS(cg_solve(a, std::vector<double>{1.0, 2.0, 3.0}, 1e-10, 10),
                    ShapeMismatch);
}

namespace {

// Partial-pivot Gaussian elimination, the dense oracle for the cg path.
std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    return x;
}

}  // namespace

TEST_CASE("ridge solutions agree with a dense direct solve") {
    Rng rng(61);
    Matrix x(20, 6);
    std::vector<double> y(20);
    for (double& v : x.values()) v = rng.uniform_real(-1.0, 1.0);
    for (double& v : y) v = rng.uniform(2) ? 1.0 : -1.0;

    const std::vector<double> w = ridge_solve(x, y, 1.0, 1e-10);

    Matrix g = matmul(x, x, true, false);
    for (std::size_t i = 0; i < 6; ++i) g(i, i) += 1.0;
    const Matrix rhs_m = matmul(x, Matrix(20, 1, y), true, false);
    const std::vector<double> rhs(rhs_m.values().begin(), rhs_m.values().end());
    const std::vector<double> want = gauss_solve(g, rhs);

    double residual = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        double row = -rhs[i];
        for (std::size_t j = 0; j < 6; ++j) row += g(i, j) * w[j];
        residual += row * row;
        CHECK(w[i] == doctest::Approx(want[i]).epsilon(1e-7));
    }
    CHECK(std::sqrt(residual) < 1e-3);
}

TEST_CASE("ridge classifier squashes the linear score through a sigmoid") {
    const Corpus corpus = synth_corpus(80, 67);
    const std::vector<EncodedName> x = encode_corpus(corpus);
    const std::vector<int> y = label_ints(corpus);
    const Ridge model = fit_ridge(x, y);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        correct += static_cast<std::size_t>(model.predict(x[i]) == y[i]);
    CHECK(static_cast<double>(correct) / static_cast<double>(x.size()) >= 0.95);

    const EncodedName& q = x[0];
    double score = 0.0;
    for (std::size_t row = 0; row < kMaxNameLen; ++row)
        score += model.weights[row * kVocabSize + q.symbol_index(row)];
    CHECK(model.predict_proba(q) == doctest::Approx(1.0 / (1.0 + std::exp(-score))));
}

TEST_CASE("label extraction mirrors corpus genders") {
    Corpus corpus;
    corpus.records.push_back({1, "JOSE", 1.0, {}});
    corpus.records.push_back({0, "ANA", 1.0, {}});
    CHECK(label_ints(corpus) == std::vector<int>{1, 0});
}
