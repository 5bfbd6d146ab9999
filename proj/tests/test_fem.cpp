#include <doctest.h>

#include "perihom/errors.hpp"
#include "perihom/fem.hpp"
#include "perihom/operators.hpp"
#include "perihom/sparse.hpp"

#include "support/dense_oracle.hpp"

#include <cmath>
#include <random>

using namespace perihom;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("element mass matches the closed-form bilinear integrals") {
    // exact integration of shape products: diagonal h²/9, pattern 4/2/1 over 36
    const auto& ref = ElementMatrices::reference_mass();
    CHECK(ref[0][0] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(ref[0][1] == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
    CHECK(ref[0][2] == doctest::Approx(1.0 / 36.0).epsilon(1e-15));
    CHECK(ref[1][3] == doctest::Approx(1.0 / 36.0).epsilon(1e-15));
    double sum = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            sum += ref[i][j];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mass matrix is a partition of unity") {
    SUBCASE("no hole") {
        const auto g = build_cell_geometry(2, std::nullopt, 2);
        const auto grid = build_perforated_grid(g, 0.5, {1, 1});
        const auto M = assemble_mass(grid);
        CHECK(M.entry_sum() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(M.max_asymmetry() == doctest::Approx(0.0));
    }
    SUBCASE("perforated") {
        const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto M = assemble_mass(grid);
        CHECK(M.entry_sum() == doctest::Approx(8.0 / 9.0).epsilon(1e-13));
    }
}

TEST_CASE("stiffness against linear fields") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    const auto K = assemble_stiffness(grid, Sym2{1.0, 0.0, 1.0});

    SUBCASE("quadratic form of x1 equals the perforated volume") {
        const auto u = sample_nodal(grid, [](double x, double) { return x; });
        CHECK(K.quadratic_form(u.values) ==
              doctest::Approx(grid.measure_omega_eps).epsilon(1e-13));
    }
    SUBCASE("constants lie in the kernel") {
        std::vector<double> ones(static_cast<std::size_t>(grid.n_nodes), 1.0);
        const auto r = K.multiply(ones);
        double worst = 0;
        for (double v : r)
            worst = std::max(worst, std::abs(v));
        CHECK(worst <= 1e-13);
    }
    SUBCASE("row sums vanish") {
        for (double s : K.row_sums())
            CHECK(std::abs(s) <= 1e-13);
    }
    SUBCASE("assembled form is symmetric") { CHECK(K.max_asymmetry() <= 1e-14); }
}

TEST_CASE("anisotropic coefficient weights the directions") {
    const auto g = build_cell_geometry(2, std::nullopt, 4);
    const auto grid = build_perforated_grid(g, 0.5, {1, 1});
    const auto K = assemble_stiffness(grid, Sym2{2.0, 0.0, 1.0});
    const auto u = sample_nodal(grid, [](double, double y) { return y; });
    CHECK(K.quadratic_form(u.values) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("non-elliptic coefficients are rejected") {
    const auto g = build_cell_geometry(2, std::nullopt, 4);
    const auto grid = build_perforated_grid(g, 0.5, {1, 1});
    CHECK_THROWS_AS(assemble_stiffness(grid, Sym2{1.0, 2.0, 1.0}), AssemblyError);
}

TEST_CASE("robin boundary form") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 12);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});

    SUBCASE("constant field measures the scaled pore surface") {
        const auto B = assemble_robin_boundary(grid, 1.0, grid.pore_facets);
        std::vector<double> ones(static_cast<std::size_t>(grid.n_nodes), 1.0);
        // ε · per(∂T_ε) = (1/4)(16/3)
        CHECK(B.quadratic_form(ones) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
        CHECK(B.max_asymmetry() <= 1e-15);
    }
    SUBCASE("zero coefficient gives the zero matrix") {
        const auto B = assemble_robin_boundary(grid, 0.0, grid.pore_facets);
        CHECK(B.entry_sum() == 0.0);
    }
    SUBCASE("no facets give the zero matrix") {
        const auto g0 = build_cell_geometry(2, std::nullopt, 4);
        const auto grid0 = build_perforated_grid(g0, 0.25, {1, 1});
        const auto B = assemble_robin_boundary(grid0, 1.0, grid0.pore_facets);
        CHECK(B.nonzeros() == 0);
        CHECK(B.dimension() == grid0.n_nodes);
    }
}

TEST_CASE("conjugate gradients") {
    SUBCASE("mass system reproduces constants") {
        const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto M = assemble_mass(grid);
        std::vector<double> ones(static_cast<std::size_t>(grid.n_nodes), 1.0);
        const auto rhs = M.multiply(ones);
        const auto x = solve_spd(M, rhs);
        for (double v : x)
            CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("tiny diagonal system") {
        TripletAccumulator acc(2);
        acc.add(0, 0, 2.0);
        acc.add(1, 1, 1.0);
        const auto A = acc.compress();
        const auto x = solve_spd(A, std::vector<double>{2.0, 3.0});
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("random SPD system against dense elimination") {
        const int n = 50;
        std::mt19937_64 rng(91);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        oracle::DenseMatrix B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                B(i, j) = dist(rng);
        oracle::DenseMatrix A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = i == j ? 1.0 : 0.0;
                for (int k = 0; k < n; ++k)
                    s += B(k, i) * B(k, j);
                A(i, j) = s;
            }
        std::vector<double> rhs(n);
        for (auto& v : rhs)
            v = dist(rng);

        TripletAccumulator acc(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                acc.add(i, j, A(i, j));
        const auto As = acc.compress();
        SolveOptions opts;
        opts.tol = 1e-12;
        const auto x = solve_spd(As, rhs, opts);
        const auto ref = oracle::solve_dense(A, rhs);
        for (int i = 0; i < n; ++i)
            CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-8));
    }
    SUBCASE("non-convergence carries the residual") {
        const auto g = build_cell_geometry(2, std::nullopt, 4);
        const auto grid = build_perforated_grid(g, 0.25, {1, 1});
        const auto M = assemble_mass(grid);
        std::vector<double> rhs(static_cast<std::size_t>(grid.n_nodes), 1.0);
        SolveOptions opts;
        opts.tol = 1e-14;
        opts.max_iter = 1;
        CHECK_THROWS_AS((void)solve_spd(M, rhs, opts), SolverError);
    }
}

TEST_CASE("manufactured Neumann problem converges at second order") {
    // -Δu = f with u = cos(πx)cos(πy) on the unit square
    const auto g = build_cell_geometry(2, std::nullopt, 1);
    std::vector<std::pair<double, double>> pts;
    for (int n : {8, 16, 32, 64}) {
        const auto grid = build_perforated_grid(g, 1.0 / n, {1, 1});
        const auto K = assemble_stiffness(grid, Sym2{1.0, 0.0, 1.0});
        const auto M = assemble_mass(grid);
        const auto f = sample_nodal(grid, [](double x, double y) {
            return 2.0 * kPi * kPi * std::cos(kPi * x) * std::cos(kPi * y);
        });
        auto rhs = M.multiply(f.values);
        SolveOptions opts;
        opts.tol = 1e-12;
        opts.deflate_constants = true;
        auto sol = solve_spd(K, rhs, opts);

        auto exact = sample_nodal(grid, [](double x, double y) {
            return std::cos(kPi * x) * std::cos(kPi * y);
        });
        // compare mean-free representatives
        double mean_sol = 0, mean_ex = 0;
        for (std::size_t i = 0; i < sol.size(); ++i) {
            mean_sol += sol[i];
            mean_ex += exact.values[i];
        }
        mean_sol /= static_cast<double>(sol.size());
        mean_ex /= static_cast<double>(sol.size());
        ScalarField err(grid);
        for (std::size_t i = 0; i < sol.size(); ++i)
            err.values[i] = (sol[i] - mean_sol) - (exact.values[i] - mean_ex);
        pts.emplace_back(1.0 / n, l2_norm(err));
    }
    double slope_sum = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        slope_sum += std::log(pts[i - 1].second / pts[i].second) / std::log(2.0);
    const double slope = slope_sum / 3.0;
    CHECK(slope >= 1.8);
    CHECK(slope <= 2.2);
}

TEST_CASE("element matrices match the independent quadrature oracle") {
    const auto km = oracle::element_mass(0.5);
    const auto& ref = ElementMatrices::reference_mass();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(km[i][j] == doctest::Approx(0.25 * ref[i][j]).epsilon(1e-14));
    const auto ks = oracle::element_stiffness(2.0, 0.5, 3.0);
    const auto lib = ElementMatrices::stiffness(Sym2{2.0, 0.5, 3.0});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(ks[i][j] == doctest::Approx(lib[i][j]).epsilon(1e-14));
}
