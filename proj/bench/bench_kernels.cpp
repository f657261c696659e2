#include <benchmark/benchmark.h>

#include "topox/kernels.hpp"
#include "topox/oversquash.hpp"
#include "topox/rng.hpp"

using namespace topox;

namespace {

Matrix random_dense(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.normal();
    return m;
}

SparseMatrix random_sparse(std::size_t n, std::size_t per_row, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SparseMatrix::Entry> es;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < per_row; ++k) es.push_back({i, rng.below(n), rng.normal()});
    return SparseMatrix::from_entries(n, n, std::move(es));
}

// Square-ish transfer-training shape: (rows x d) * (d x d).
void BM_matmul(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0)), d = static_cast<std::size_t>(st.range(1));
    const Matrix a = random_dense(n, d, 1), b = random_dense(d, d, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::matmul(a, b));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * n * d * d));
}

void BM_matmul_serial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0)), d = static_cast<std::size_t>(st.range(1));
    const Matrix a = random_dense(n, d, 1), b = random_dense(d, d, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::matmul(a, b));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * n * d * d));
}

void BM_matmul_nt(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0)), d = static_cast<std::size_t>(st.range(1));
    const Matrix a = random_dense(n, d, 1), b = random_dense(d, d, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::matmul_nt(a, b));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * n * d * d));
}

void BM_matmul_tn(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0)), d = static_cast<std::size_t>(st.range(1));
    const Matrix a = random_dense(n, d, 1), b = random_dense(n, d, 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::matmul_tn(a, b));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * n * d * d));
}

void BM_spmm(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const SparseMatrix s = random_sparse(n, 6, 3);
    const Matrix h = random_dense(n, 64, 4);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::spmm(s, h));
}

void BM_spmm_serial(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    const SparseMatrix s = random_sparse(n, 6, 3);
    const Matrix h = random_dense(n, 64, 4);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::spmm(s, h));
}

void BM_pairwise_resistance(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    Matrix p = random_dense(n, n, 5);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) p(i, j) = p(j, i);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::pairwise_resistance(p));
}

void BM_resistance_matrix(benchmark::State& st) {
    Rng rng(6);
    const Graph g = random_connected_graph(static_cast<int>(st.range(0)), 0.1, rng);
    for (auto _ : st) benchmark::DoNotOptimize(resistance_matrix(g));
}

}  // namespace

BENCHMARK(BM_matmul)->Args({100, 64})->Args({100, 128})->Args({512, 256});
BENCHMARK(BM_matmul_serial)->Args({100, 64})->Args({100, 128})->Args({512, 256});
BENCHMARK(BM_matmul_nt)->Args({100, 128});
BENCHMARK(BM_matmul_tn)->Args({100, 128});
BENCHMARK(BM_spmm)->Arg(1000)->Arg(10000);
// The serial reference densifies, so only the small size is worth timing.
BENCHMARK(BM_spmm_serial)->Arg(1000);
BENCHMARK(BM_pairwise_resistance)->Arg(200)->Arg(800);
BENCHMARK(BM_resistance_matrix)->Arg(100);

BENCHMARK_MAIN();
