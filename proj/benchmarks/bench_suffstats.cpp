#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ssreg/suffstats.hpp"

namespace {

using ssreg::BoxCoxSS;
using ssreg::LinRegSS;
using ssreg::RealVector;

struct Data {
    std::size_t p;
    std::vector<double> x;  // row-major rows x p
    RealVector y;
};

Data make_data(std::size_t rows, std::size_t p, bool positive) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Data d{p, std::vector<double>(rows * p), RealVector(rows)};
    for (std::size_t r = 0; r < rows; ++r) {
        d.x[r * p] = 1.0;
        for (std::size_t j = 1; j < p; ++j) d.x[r * p + j] = unif(rng);
        const double v = unif(rng) * 3.0;
        d.y[r] = positive ? std::exp(v / 3.0) : v;
    }
    return d;
}

// Accumulation throughput per batch size; batch 1 exposes the per-row
// overhead the batched update amortizes.
void BM_LinearAccumulate(benchmark::State& state) {
    const std::size_t batch = static_cast<std::size_t>(state.range(0));
    const std::size_t p = static_cast<std::size_t>(state.range(1));
    const Data d = make_data(4096, p, false);
    for (auto _ : state) {
        LinRegSS ss(p);
        for (std::size_t start = 0; start < 4096; start += batch) {
            const std::size_t m = std::min(batch, 4096 - start);
            ss.add_batch(d.x.data() + start * p, m, d.y.data() + start);
        }
        benchmark::DoNotOptimize(ss.s_yy());
    }
    state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_LinearAccumulate)
    ->Args({1, 16})
    ->Args({128, 16})
    ->Args({1, 101})
    ->Args({128, 101});

// Marginal cost of widening the Box-Cox grid: the x'x work is shared, only
// the per-parameter vectors grow.
void BM_BoxCoxGrid(benchmark::State& state) {
    const int grid_size = static_cast<int>(state.range(0));
    const std::size_t p = 101;
    const Data d = make_data(2048, p, true);
    RealVector grid;
    for (int k = 0; k < grid_size; ++k) {
        grid.push_back(-1.5 + 3.0 * k / std::max(1, grid_size - 1));
    }
    for (auto _ : state) {
        BoxCoxSS ss(p, grid);
        for (std::size_t start = 0; start < 2048; start += 128) {
            ss.add_batch(d.x.data() + start * p, 128, d.y.data() + start);
        }
        benchmark::DoNotOptimize(ss.s_logy());
    }
    state.SetItemsProcessed(state.iterations() * 2048);
}
BENCHMARK(BM_BoxCoxGrid)->Arg(1)->Arg(8)->Arg(31);

}  // namespace
