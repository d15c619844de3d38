#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "nomina/classical.hpp"
#include "nomina/corpus.hpp"
#include "nomina/encoder.hpp"
#include "nomina/matrix.hpp"
#include "nomina/neural.hpp"
#include "nomina/rng.hpp"

namespace {

using namespace nomina;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform_real(-1.0, 1.0);
    return m;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Matrix a = random_matrix(n, n, rng);
    const Matrix b = random_matrix(n, n, rng);
    for (auto _ : state) {
        Matrix c = matmul(a, b);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(128);

void BM_EncodeName(benchmark::State& state) {
    const std::string name = "FRANCISCA";
    for (auto _ : state) {
        EncodedName enc = encode(name);
        benchmark::DoNotOptimize(enc.cells.data());
    }
}
BENCHMARK(BM_EncodeName);

void BM_LstmForward(benchmark::State& state) {
    const auto batch = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    Lstm layer(kVocabSize, 64, kMaxNameLen, false);
    layer.init(rng);
    const Matrix x = random_matrix(batch, kFlatLen, rng);
    for (auto _ : state) {
        Matrix h = layer.forward(x, false);
        benchmark::DoNotOptimize(h.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(batch));
}
BENCHMARK(BM_LstmForward)->Arg(1)->Arg(32);

void BM_TreeFit(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Corpus corpus = synth_corpus(n, 3);
    const std::vector<EncodedName> x = encode_corpus(corpus);
    const std::vector<int> y = label_ints(corpus);
    for (auto _ : state) {
        DecisionTree tree = fit_tree(x, y);
        benchmark::DoNotOptimize(tree.tree.nodes.data());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(n));
}
BENCHMARK(BM_TreeFit)->Arg(500)->Arg(2000);

void BM_KnnQuery(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Corpus corpus = synth_corpus(n, 4);
    const Knn model = fit_knn(encode_corpus(corpus), label_ints(corpus), 5);
    const EncodedName query = encode("VALENTINA");
    for (auto _ : state) {
        double p = model.predict_proba(query);
        benchmark::DoNotOptimize(p);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(n));
}
BENCHMARK(BM_KnnQuery)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
