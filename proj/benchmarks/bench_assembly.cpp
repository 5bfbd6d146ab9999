#include "perihom/fem.hpp"
#include "perihom/geometry.hpp"
#include "perihom/presets.hpp"

#include <benchmark/benchmark.h>

using namespace perihom;

namespace {

const CellGeometry& hole_cell() {
    static const CellGeometry g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
    return g;
}

void bm_build_grid(benchmark::State& state) {
    const int inv = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto grid = build_perforated_grid(hole_cell(), 1.0 / inv, {1, 1});
        benchmark::DoNotOptimize(grid.n_nodes);
    }
}

void bm_assemble_mass(benchmark::State& state) {
    const int inv = static_cast<int>(state.range(0));
    const auto grid = build_perforated_grid(hole_cell(), 1.0 / inv, {1, 1});
    for (auto _ : state) {
        auto m = assemble_mass(grid);
        benchmark::DoNotOptimize(m.nonzeros());
    }
}

void bm_assemble_stiffness(benchmark::State& state) {
    const int inv = static_cast<int>(state.range(0));
    const auto grid = build_perforated_grid(hole_cell(), 1.0 / inv, {1, 1});
    const auto coeff =
        sample_coefficient(hole_cell(), coefficient_preset("oscillating"), 0.05, 20.0);
    for (auto _ : state) {
        auto k = assemble_stiffness(grid, coeff, 1.0);
        benchmark::DoNotOptimize(k.nonzeros());
    }
}

} // namespace

BENCHMARK(bm_build_grid)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_assemble_mass)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_assemble_stiffness)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
