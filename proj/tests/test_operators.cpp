#include <doctest.h>

#include "perihom/fem.hpp"
#include "perihom/operators.hpp"

#include <cmath>
#include <random>

using namespace perihom;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarField random_field(const PerforatedGrid& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.1, 1.1);
    ScalarField u(grid);
    for (auto& v : u.values)
        v = dist(rng);
    return u;
}

} // namespace

TEST_CASE("unfolding evaluates u(ε[x/ε] + εy)") {
    const auto g = build_cell_geometry(2, std::nullopt, 8);
    const auto grid = build_perforated_grid(g, 0.5, {1, 1});
    const auto idx = make_two_scale_index(grid);
    const auto u = sample_nodal(grid, [](double x, double) { return x; });
    const auto tu = unfold(u, idx);
    // macro cell containing (0.6, 0.3) is ξ = (1, 0); y = (1/4, 1/2)
    CHECK(tu.at(1, 0, g.full_id(2, 4)) == doctest::Approx(0.625).epsilon(1e-15));

    ScalarField c(grid);
    for (auto& v : c.values)
        v = 3.5;
    const auto tc = unfold(c, idx);
    for (double v : tc.values)
        CHECK(v == 3.5);
}

TEST_CASE("unfolding preserves integrals and norms of random fields") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    const auto idx = make_two_scale_index(grid);
    const auto u = random_field(grid, 7);
    const auto tu = unfold(u, idx);
    CHECK(ts_integral(tu) == doctest::Approx(integral(u)).epsilon(1e-13));
    CHECK(ts_l2_norm(tu) == doctest::Approx(l2_norm(u)).epsilon(1e-13));
}

TEST_CASE("boundary unfolding matches the scaled surface integral") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});

    SUBCASE("unit trace integrates to |Ω| per(∂T)") {
        ScalarField ones(grid);
        for (auto& v : ones.values)
            v = 1.0;
        const auto tb = unfold_boundary(trace_on_pores(ones));
        CHECK(ts_boundary_integral(tb) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
        CHECK(grid.epsilon * boundary_integral(trace_on_pores(ones)) ==
              doctest::Approx(4.0 / 3.0).epsilon(1e-13));
    }
    SUBCASE("zero trace integrates to zero") {
        ScalarField z(grid);
        const auto tb = unfold_boundary(trace_on_pores(z));
        CHECK(ts_boundary_integral(tb) == 0.0);
    }
}

TEST_CASE("folding averages the macro variable") {
    const auto g = build_cell_geometry(2, std::nullopt, 4);
    const auto grid = build_perforated_grid(g, 0.5, {1, 1});
    const auto idx = make_two_scale_index(grid);

    SUBCASE("pure-x field folds to cell centers") {
        const auto U = sample_two_scale(
            idx, [](double x, double, double, double) { return x; });
        const auto f = fold(U, grid);
        // node (0.5, 0) belongs to the half-open cell [0.5,1)x[0,0.5)
        CHECK(f.values[grid.nid(4, 0)] == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(f.values[grid.nid(0, 0)] == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("pure-y field folds to its ε-periodization") {
        const auto U = sample_two_scale(
            idx, [](double, double, double y1, double) { return std::sin(2.0 * kPi * y1); });
        const auto f = fold(U, grid);
        for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
            const int gi = grid.node_coord[id][0];
            const int a = gi == grid.cells_x ? 4 : gi % 4;
            CHECK(f.values[id] ==
                  doctest::Approx(std::sin(2.0 * kPi * a / 4.0)).epsilon(1e-12));
        }
    }
    SUBCASE("folding does not increase the L2 norm") {
        // discretely the dominance holds up to the seam-interpolation strip:
        // exact for y-periodic slices, O(1/m) allowance for arbitrary data
        const auto gh = build_cell_geometry(2, HoleBox{0.25, 0.75}, 8);
        const auto gridh = build_perforated_grid(gh, 0.25, {1, 1});
        const auto idxh = make_two_scale_index(gridh);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        TwoScaleField U(idxh);
        for (auto& v : U.values)
            v = dist(rng);
        const auto f = fold(U, gridh);
        CHECK(l2_norm(f) <= ts_l2_norm(U) * (1.0 + 4.0 / 8.0));

        const auto Up = sample_two_scale(idxh, [](double, double, double y1, double y2) {
            return std::sin(2.0 * kPi * y1) * std::cos(2.0 * kPi * y2);
        });
        const auto fp = fold(Up, gridh);
        CHECK(l2_norm(fp) <= ts_l2_norm(Up) * (1.0 + 1e-11));
    }
}

TEST_CASE("gradient folding") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);

    SUBCASE("constants are reproduced to solver tolerance") {
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto idx = make_two_scale_index(grid);
        const auto U =
            sample_two_scale(idx, [](double, double, double, double) { return 2.25; });
        const auto gu = gradient_fold(U, grid);
        for (double v : gu.values)
            CHECK(v == doctest::Approx(2.25).epsilon(1e-9));
    }
    SUBCASE("pure y-oscillation folds with no mismatch at all") {
        // aligned grids periodize y-only data exactly; the mismatch sits at
        // the solver tolerance instead of the O(ε) bound
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto idx = make_two_scale_index(grid);
        const auto U = sample_two_scale(idx, [](double, double, double y1, double) {
            return std::sin(2.0 * kPi * y1);
        });
        const auto gu = gradient_fold(U, grid);
        auto gg = discrete_gradient(gu);
        const auto fgy = fold_cells(grad_y(U), grid);
        for (std::size_t i = 0; i < gg.vx.size(); ++i) {
            gg.vx[i] = grid.epsilon * gg.vx[i] - fgy.vx[i];
            gg.vy[i] = grid.epsilon * gg.vy[i] - fgy.vy[i];
        }
        CHECK(l2_norm(gg) <= 1e-8);
    }
    SUBCASE("mixed data shows the O(ε) folding mismatch") {
        double prev = 0.0;
        for (int inv : {4, 8}) {
            const auto grid = build_perforated_grid(g, 1.0 / inv, {1, 1});
            const auto idx = make_two_scale_index(grid);
            const auto U = sample_two_scale(idx, [](double x1, double x2, double y1, double) {
                return (1.0 + x1 * x2) * (1.0 + 0.5 * std::cos(2.0 * kPi * y1));
            });
            const auto gu = gradient_fold(U, grid);
            const auto fu = fold(U, grid);
            ScalarField d0 = gu;
            for (std::size_t i = 0; i < d0.values.size(); ++i)
                d0.values[i] -= fu.values[i];
            auto gg = discrete_gradient(gu);
            const auto fgy = fold_cells(grad_y(U), grid);
            for (std::size_t i = 0; i < gg.vx.size(); ++i) {
                gg.vx[i] = grid.epsilon * gg.vx[i] - fgy.vx[i];
                gg.vy[i] = grid.epsilon * gg.vy[i] - fgy.vy[i];
            }
            const double err = l2_norm(d0) + l2_norm(gg);
            if (prev > 0.0)
                CHECK(err < 0.7 * prev);
            prev = err;
        }
    }
}

TEST_CASE("epsilon norm and its unfolded identity") {
    SUBCASE("constant on the perforated domain") {
        const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        ScalarField ones(grid);
        for (auto& v : ones.values)
            v = 1.0;
        CHECK(eps_norm(ones) == doctest::Approx(std::sqrt(8.0 / 9.0)).epsilon(1e-13));
    }
    SUBCASE("linear field on the unperforated square") {
        const auto g = build_cell_geometry(2, std::nullopt, 4);
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto u = sample_nodal(grid, [](double x, double) { return x; });
        CHECK(eps_norm(u) ==
              doctest::Approx(std::sqrt(1.0 / 3.0) + 0.25).epsilon(1e-13));
    }
    SUBCASE("identity with the unfolded H1(Y_*) norm on random fields") {
        const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
        for (int inv : {4, 8}) {
            const auto grid = build_perforated_grid(g, 1.0 / inv, {1, 1});
            const auto idx = make_two_scale_index(grid);
            const auto u = random_field(grid, 100 + inv);
            const auto tu = unfold(u, idx);
            const double lhs = ts_h1y_norm_sum(tu);
            const double rhs = eps_norm(u);
            CHECK(std::abs(lhs - rhs) / rhs <= 1e-12);
        }
    }
}

TEST_CASE("unfolded gradient commutes with the y-gradient") {
    const auto g = build_cell_geometry(2, HoleBox{0.25, 0.75}, 4);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    const auto idx = make_two_scale_index(grid);
    const auto u = random_field(grid, 3);
    auto tg = unfold_gradient(u, idx);
    for (auto& v : tg.vx)
        v *= grid.epsilon;
    for (auto& v : tg.vy)
        v *= grid.epsilon;
    const auto gy = grad_y(unfold(u, idx));
    double worst = 0;
    for (std::size_t i = 0; i < tg.vx.size(); ++i)
        worst = std::max({worst, std::abs(tg.vx[i] - gy.vx[i]),
                          std::abs(tg.vy[i] - gy.vy[i])});
    CHECK(worst <= 1e-12);
}
