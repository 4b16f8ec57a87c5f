// Micro-benchmarks for the numeric kernels and the reduction pipeline.
// Data is generated inline with fixed seeds so runs are comparable.
#include <benchmark/benchmark.h>

#include <conereg/auxcert.hpp>
#include <conereg/facered.hpp>
#include <conereg/ipmprobe.hpp>
#include <conereg/numkernel.hpp>

#include <random>

using namespace conereg;

namespace {

Matrix gaussian(int rows, int cols, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = dist(gen);
    return m;
}

// Orthant system with a forced zero coordinate: a row pair
// x1 + x2 = 0 on nonnegative variables plus generic satisfied rows.
ConicSystem failing_orthant(int n, int m, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.2, 1.0);
    Matrix a = gaussian(m, n, seed + 1);
    Vector x0 = Vector::Zero(n);
    for (int i = 2; i < n; ++i) x0(i) = unit(gen);
    a(0, 0) = 1.0;
    a(0, 1) = 1.0;
    for (int j = 2; j < n; ++j) a(0, j) = 0.0;
    Vector b = a * x0;
    b(0) = 0.0;
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Orthant, n});
    return make_system(spec, a, b);
}

ConicSystem exp_fixture() {
    Matrix a(2, 3);
    a << 0, 1, 0, 1, -1, 0;
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Exponential, 3});
    return make_system(spec, a, Vector::Zero(2));
}

void bm_sym_eigendecomposition(benchmark::State& state) {
    const int n = int(state.range(0));
    const Matrix g = gaussian(n, n, 11);
    const Matrix s = 0.5 * (g + g.transpose());
    for (auto _ : state) benchmark::DoNotOptimize(sym_eigendecomposition(s));
}

void bm_numeric_rank(benchmark::State& state) {
    const int n = int(state.range(0));
    const Matrix m = gaussian(n, n / 2, 13) * gaussian(n / 2, n, 17);
    for (auto _ : state) benchmark::DoNotOptimize(numerical_rank(m));
}

void bm_solve_orthant(benchmark::State& state) {
    const ConicSystem sys = failing_orthant(8, 5, 19);
    for (auto _ : state) benchmark::DoNotOptimize(solve_orthant(sys));
}

void bm_run_fr_exp(benchmark::State& state) {
    const ConicSystem sys = exp_fixture();
    FrOptions opt;
    opt.aux.candidates = {Vector{{1.0, 0.0}}, Vector{{-1.0, -1.0}}};
    for (auto _ : state) benchmark::DoNotOptimize(run_fr(sys, opt));
}

void bm_normal_matrix_psd(benchmark::State& state) {
    const int n = 6, m = 8;
    ConeSpec spec;
    spec.blocks.push_back({ConeClass::Psd, n});
    const Matrix a = gaussian(m, svec_dim(n), 23);
    const ConicSystem sys = make_system(spec, a, Vector::Zero(m));
    const Matrix g = gaussian(n, 2, 29);
    Point x;
    x.blocks.push_back(Matrix(g * g.transpose()));
    for (auto _ : state) benchmark::DoNotOptimize(normal_matrix(sys, x));
}

}  // namespace

BENCHMARK(bm_sym_eigendecomposition)->Arg(10)->Arg(30);
BENCHMARK(bm_numeric_rank)->Arg(10)->Arg(30);
BENCHMARK(bm_solve_orthant);
BENCHMARK(bm_run_fr_exp);
BENCHMARK(bm_normal_matrix_psd);

BENCHMARK_MAIN();
