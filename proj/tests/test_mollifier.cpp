#include <doctest.h>

#include "perihom/errors.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/operators.hpp"

#include <cmath>

using namespace perihom;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("discrete kernel is renormalized to unit sum") {
    const auto m = make_mollifier(0.25, 1.0 / 48.0);
    CHECK(m.weight_sum == doctest::Approx(1.0).epsilon(1e-14));
    double sum = 0.0;
    for (double w : m.jw) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // odd symmetry of the gradient kernel
    double gx_sum = 0.0, gy_sum = 0.0;
    for (std::size_t k = 0; k < m.gwx.size(); ++k) {
        gx_sum += m.gwx[k];
        gy_sum += m.gwy[k];
    }
    CHECK(std::abs(gx_sum) <= 1e-13);
    CHECK(std::abs(gy_sum) <= 1e-13);
}

TEST_CASE("unresolved kernels are rejected") {
    CHECK_THROWS_AS(make_mollifier(0.01, 0.25), ParameterError);
    CHECK_THROWS_AS(make_mollifier(-1.0, 0.1), ParameterError);
}

TEST_CASE("admissibility thresholds") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
    SUBCASE("delta below the hole scale is a hard error") {
        const auto c = check_mollifier(0.05, 0.25, g);
        CHECK_FALSE(c.admissible);
        CHECK_THROWS_AS(require_mollifier(0.05, 0.25, g), ParameterError);
    }
    SUBCASE("default delta passes at coarse ε with a recorded warning") {
        const auto c = check_mollifier(0.25, 0.25, g);
        CHECK(c.admissible);
        CHECK_FALSE(c.strict_bound_ok);
        CHECK_NOTHROW(require_mollifier(0.25, 0.25, g));
    }
    SUBCASE("fine ε satisfies the full bound") {
        const auto c = check_mollifier(0.25, 1.0 / 16.0, g);
        CHECK(c.admissible);
        CHECK(c.strict_bound_ok);
    }
}

TEST_CASE("gradient of a constant vanishes away from the boundary") {
    const auto g = build_cell_geometry(2, std::nullopt, 4);
    const auto grid = build_perforated_grid(g, 1.0 / 12.0, {1, 1});
    ScalarField u(grid);
    for (auto& v : u.values)
        v = 3.0;
    const auto moll = make_mollifier(0.25, grid.h);
    const auto gd = mollified_gradient(u, moll);
    for (int gj = 0; gj <= grid.cells_y; ++gj)
        for (int gi = 0; gi <= grid.cells_x; ++gi) {
            const double x = gi * grid.h, y = gj * grid.h;
            const double dist = std::min({x, y, 1.0 - x, 1.0 - y});
            if (dist <= 0.25 + 2 * grid.h)
                continue;
            const auto k = gd.at(gi, gj);
            CHECK(std::abs(gd.vx[k]) <= 1e-12);
            CHECK(std::abs(gd.vy[k]) <= 1e-12);
        }
}

TEST_CASE("mollified gradient approximates the smooth gradient") {
    // J_δ * u ≈ u for slowly varying u, so ∇^δ u ≈ ∇u in the interior
    const auto g = build_cell_geometry(2, std::nullopt, 4);
    const auto grid = build_perforated_grid(g, 1.0 / 24.0, {1, 1});
    const auto u = sample_nodal(grid, [](double x, double) { return std::sin(0.5 * x); });
    const auto moll = make_mollifier(0.2, grid.h);
    const auto gd = mollified_gradient(u, moll);
    const int gi = grid.cells_x / 2, gj = grid.cells_y / 2;
    const auto k = gd.at(gi, gj);
    const double want = 0.5 * std::cos(0.5 * gi * grid.h);
    CHECK(gd.vx[k] == doctest::Approx(want).epsilon(0.02));
    CHECK(std::abs(gd.vy[k]) <= 0.01);
}

TEST_CASE("fast evaluator agrees with the exact convolution") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 1.0 / 8.0, {1, 1});
    const auto u = sample_nodal(grid, [](double x, double y) {
        return 1.0 + 0.5 * std::cos(kPi * x) * std::sin(2.0 * kPi * y);
    });
    const auto moll = make_mollifier(0.25, grid.h);
    const auto exact = mollified_gradient(u, moll);

    MollifiedGradientEvaluator eval(grid, moll, 12);
    eval.update(u);

    double scale = 1e-300;
    for (std::size_t k = 0; k < exact.vx.size(); ++k)
        scale = std::max({scale, std::abs(exact.vx[k]), std::abs(exact.vy[k])});
    double worst = 0.0;
    for (int gj = 0; gj <= grid.cells_y; ++gj)
        for (int gi = 0; gi <= grid.cells_x; ++gi) {
            const auto v = eval.eval(gi * grid.h, gj * grid.h);
            const auto k = exact.at(gi, gj);
            worst = std::max({worst, std::abs(v[0] - exact.vx[k]),
                              std::abs(v[1] - exact.vy[k])});
        }
    CHECK(worst / scale <= 5e-3);
}
