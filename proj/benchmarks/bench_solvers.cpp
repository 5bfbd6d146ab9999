#include "perihom/cell_problem.hpp"
#include "perihom/config.hpp"
#include "perihom/micro_solver.hpp"
#include "perihom/presets.hpp"

#include <benchmark/benchmark.h>

using namespace perihom;

namespace {

void bm_cell_problem(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto geom = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, m);
    const auto coeff = sample_coefficient(geom, coefficient_preset("identity"), 0.05, 20.0);
    for (auto _ : state) {
        auto tensor = solve_cell_problems(geom, coeff);
        benchmark::DoNotOptimize(tensor.d_eff.a11);
    }
}

void bm_micro_step(benchmark::State& state) {
    const int inv = static_cast<int>(state.range(0));
    RunConfig cfg;
    const auto geom = make_geometry(cfg);
    const auto grid = build_perforated_grid(geom, 1.0 / inv, {1, 1});
    const auto problem = make_micro_problem(cfg, grid, 1e-3);
    MicroSolver solver(problem);
    ScalarField u = problem.u0, theta = problem.theta0;
    int step = 0;
    for (auto _ : state) {
        auto d = solver.step(u, theta, ++step);
        benchmark::DoNotOptimize(d.u_mass);
    }
}

} // namespace

BENCHMARK(bm_cell_problem)->Arg(12)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_micro_step)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
