#include "vwave/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vwave;

namespace {

struct Fixture {
    MaskPtr mask;
    KernelTable table;
    Eigen::VectorXd x;
    std::vector<double> u;
    kernels::OffsetList offs;

    explicit Fixture(double h)
    {
        const CrossSection sq({0.0, 0.0}, {1.0, 1.0});
        mask = section_mask(sq, section_grid(sq, h));
        table = kernel_table(mask->grid, FracOrder(0.5));
        std::mt19937_64 rng(7);
        std::normal_distribution<double> d;
        x.resize(static_cast<Eigen::Index>(mask->count()));
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x[i] = d(rng);
        u.assign(mask->grid.size(), 0.0);
        for (std::size_t i : mask->nodes)
            u[i] = d(rng);
        for (std::int64_t a = 0; a < 12; ++a)
            for (std::int64_t b = 0; b < 12; ++b)
                offs.offsets.push_back({a, b, 0});
    }
};

const Fixture& fixture()
{
    static const Fixture f(1.0 / 32);
    return f;
}

template <bool Parallel>
void BM_assemble(benchmark::State& st)
{
    const auto& f = fixture();
    Eigen::MatrixXd m;
    for (auto _ : st) {
        if constexpr (Parallel)
            kernels::omp::assemble(f.table, *f.mask, m);
        else
            kernels::serial::assemble(f.table, *f.mask, m);
        benchmark::DoNotOptimize(m.data());
    }
}

template <bool Parallel>
void BM_dense_apply(benchmark::State& st)
{
    const auto& f = fixture();
    Eigen::VectorXd y;
    for (auto _ : st) {
        if constexpr (Parallel)
            kernels::omp::dense_apply(f.table, *f.mask, f.x, y);
        else
            kernels::serial::dense_apply(f.table, *f.mask, f.x, y);
        benchmark::DoNotOptimize(y.data());
    }
}

template <bool Parallel>
void BM_autocorrelation(benchmark::State& st)
{
    const auto& f = fixture();
    std::vector<double> out;
    for (auto _ : st) {
        if constexpr (Parallel)
            kernels::omp::autocorrelation(f.mask->grid, f.u, f.offs, out);
        else
            kernels::serial::autocorrelation(f.mask->grid, f.u, f.offs, out);
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_assemble<false>)->Name("assemble/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_assemble<true>)->Name("assemble/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dense_apply<false>)->Name("dense_apply/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dense_apply<true>)->Name("dense_apply/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_autocorrelation<false>)->Name("autocorrelation/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_autocorrelation<true>)->Name("autocorrelation/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
