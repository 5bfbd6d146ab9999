#include "perihom/mollifier.hpp"
#include "perihom/operators.hpp"
#include "perihom/presets.hpp"

#include <benchmark/benchmark.h>

using namespace perihom;

namespace {

struct OpFixture {
    CellGeometry geom = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
    PerforatedGrid grid;
    TwoScaleIndex idx;
    ScalarField u;

    explicit OpFixture(int inv)
        : grid(build_perforated_grid(geom, 1.0 / inv, {1, 1})),
          idx(make_two_scale_index(grid)), u(sample_nodal(grid, default_u0)) {}
};

void bm_unfold(benchmark::State& state) {
    OpFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto tu = unfold(f.u, f.idx);
        benchmark::DoNotOptimize(tu.values.data());
    }
}

void bm_gradient_fold(benchmark::State& state) {
    OpFixture f(static_cast<int>(state.range(0)));
    const auto U = sample_two_scale(f.idx, [](double x1, double x2, double y1, double) {
        return (1.0 + x1 * x2) * (1.0 + 0.5 * y1);
    });
    for (auto _ : state) {
        auto g = gradient_fold(U, f.grid);
        benchmark::DoNotOptimize(g.values.data());
    }
}

void bm_mollified_gradient_exact(benchmark::State& state) {
    OpFixture f(static_cast<int>(state.range(0)));
    const auto moll = make_mollifier(0.25, f.grid.h);
    for (auto _ : state) {
        auto g = mollified_gradient(f.u, moll);
        benchmark::DoNotOptimize(g.vx.data());
    }
}

void bm_mollified_gradient_fast(benchmark::State& state) {
    OpFixture f(static_cast<int>(state.range(0)));
    const auto moll = make_mollifier(0.25, f.grid.h);
    MollifiedGradientEvaluator eval(f.grid, moll);
    CellVectorField out(f.grid);
    for (auto _ : state) {
        eval.update(f.u);
        eval.eval_cell_centers(out);
        benchmark::DoNotOptimize(out.vx.data());
    }
}

} // namespace

BENCHMARK(bm_unfold)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gradient_fold)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mollified_gradient_exact)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mollified_gradient_fast)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
