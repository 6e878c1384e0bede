#include <benchmark/benchmark.h>

#include <random>

#include "ssreg/linalg.hpp"

namespace {

using ssreg::Matrix;
using ssreg::NormalSolver;
using ssreg::RealVector;
using ssreg::SymMatrix;

SymMatrix random_spd(std::size_t p) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix m(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) m(i, j) = unif(rng);
    }
    SymMatrix a(p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double sum = i == j ? 1.0 : 0.0;
            for (std::size_t k = 0; k < p; ++k) sum += m(k, i) * m(k, j);
            a.set(i, j, sum);
        }
    }
    return a;
}

void BM_CholeskySolve(benchmark::State& state) {
    const std::size_t p = static_cast<std::size_t>(state.range(0));
    const SymMatrix a = random_spd(p);
    RealVector b(p, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ssreg::cholesky_solve(a, b));
    }
}
BENCHMARK(BM_CholeskySolve)->Arg(16)->Arg(101)->Arg(256);

// Factor once, reuse across a parameter grid: the pattern every grid fit
// leans on.
void BM_SolverReuse(benchmark::State& state) {
    const std::size_t p = 101;
    const int solves = static_cast<int>(state.range(0));
    const SymMatrix a = random_spd(p);
    RealVector b(p, 1.0);
    for (auto _ : state) {
        NormalSolver solver(a);
        for (int k = 0; k < solves; ++k) {
            b[0] = 1.0 + k;
            benchmark::DoNotOptimize(solver.solve(b));
        }
    }
}
BENCHMARK(BM_SolverReuse)->Arg(1)->Arg(31);

void BM_JacobiEigen(benchmark::State& state) {
    const std::size_t p = static_cast<std::size_t>(state.range(0));
    const SymMatrix a = random_spd(p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ssreg::sym_eigen(a));
    }
}
BENCHMARK(BM_JacobiEigen)->Arg(16)->Arg(64)->Arg(101);

}  // namespace
