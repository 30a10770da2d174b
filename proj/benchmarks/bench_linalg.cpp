#include <benchmark/benchmark.h>

#include <random>

#include <crossed/linalg.hpp>

using namespace crossed;

static SparseMat<QField> random_mat(int rows, int cols, unsigned seed) {
    QField q;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> val(-9, 9);
    std::uniform_int_distribution<int> pick(0, 99);
    SparseMat<QField> m(q, rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            if (pick(rng) < 30) {
                long v = val(rng);
                if (v) m.add_at(i, j, q.from_int(v));
            }
    return m;
}

static void BM_rref_rational(benchmark::State& state) {
    auto n = static_cast<int>(state.range(0));
    auto m = random_mat(n, n, 12345);
    for (auto _ : state) {
        auto r = rref(m);
        benchmark::DoNotOptimize(r.rank);
    }
}
BENCHMARK(BM_rref_rational)->Arg(32)->Arg(64)->Arg(128);

static void BM_kernel_rational(benchmark::State& state) {
    auto n = static_cast<int>(state.range(0));
    auto m = random_mat(n / 2, n, 777);
    for (auto _ : state) {
        auto k = kernel_basis(m);
        benchmark::DoNotOptimize(k.cols);
    }
}
BENCHMARK(BM_kernel_rational)->Arg(64)->Arg(128);

static void BM_sparse_compose(benchmark::State& state) {
    auto n = static_cast<int>(state.range(0));
    auto a = random_mat(n, n, 1);
    auto b = random_mat(n, n, 2);
    for (auto _ : state) {
        auto c = a * b;
        benchmark::DoNotOptimize(c.nnz());
    }
}
BENCHMARK(BM_sparse_compose)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
