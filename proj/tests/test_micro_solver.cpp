#include <doctest.h>

#include "perihom/errors.hpp"
#include "perihom/micro_solver.hpp"
#include "perihom/operators.hpp"
#include "perihom/presets.hpp"

#include "support/dense_oracle.hpp"

#include <cmath>

using namespace perihom;

namespace {

MicroProblem base_problem(const PerforatedGrid& grid, const std::string& dcoeff = "identity",
                          const std::string& kcoeff = "identity") {
    MicroProblem p;
    p.grid = &grid;
    p.diffusion = sample_coefficient(grid.cell, coefficient_preset(dcoeff), 0.05, 20.0);
    p.conductivity = sample_coefficient(grid.cell, coefficient_preset(kcoeff), 0.05, 20.0);
    p.reaction = reaction_preset("none");
    p.source = source_preset("none");
    p.u0 = ScalarField(grid);
    p.theta0 = ScalarField(grid);
    p.horizon = 0.01;
    p.dt = 1e-3;
    p.snapshot_cadence = 2;
    p.solver.tol = 1e-12;
    return p;
}

} // namespace

TEST_CASE("uncoupled constant temperature stays constant") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    for (auto& v : p.u0.values)
        v = 1.0;
    for (auto& v : p.theta0.values)
        v = 0.7;
    const auto traj = run_micro(p);
    for (const auto& snap : traj.theta)
        for (double v : snap.values)
            CHECK(v == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("pure Neumann evolution conserves mass") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    p.u0 = sample_nodal(grid, default_u0);
    p.theta0 = sample_nodal(grid, default_u0);
    const auto traj = run_micro(p);
    const double m0 = traj.diagnostics.front().u_mass;
    for (const auto& d : traj.diagnostics)
        CHECK(d.u_mass == doctest::Approx(m0).epsilon(1e-10));
}

TEST_CASE("zero data stays zero") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    p.tau = 0.5;
    p.mu = 0.5;
    p.g = 0.5;
    p.b = 0.5; // source preset none: load is zero
    p.reaction = reaction_preset("smoluchowski");
    const auto traj = run_micro(p);
    for (const auto& snap : traj.u)
        for (double v : snap.values)
            CHECK(v == 0.0);
    for (const auto& snap : traj.theta)
        for (double v : snap.values)
            CHECK(v == 0.0);
}

TEST_CASE("robin absorption decays the sup norm monotonically") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    p.a = 0.8;
    p.g = 0.8;
    for (auto& v : p.u0.values)
        v = 2.0;
    for (auto& v : p.theta0.values)
        v = 2.0;
    p.horizon = 0.02;
    const auto traj = run_micro(p);
    double prev_u = 2.0 + 1e-12, prev_t = 2.0 + 1e-12;
    for (const auto& d : traj.diagnostics) {
        CHECK(d.u_max <= prev_u * (1.0 + 1e-12));
        CHECK(d.theta_max <= prev_t * (1.0 + 1e-12));
        CHECK(d.u_max < 2.0);
        prev_u = d.u_max;
        prev_t = d.theta_max;
    }
    CHECK_FALSE(traj.positivity_violated);
}

TEST_CASE("tau = 0 decouples the concentration path bitwise") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    p.tau = 0.0;
    p.mu = 0.7;
    p.g = 0.3;
    p.reaction = reaction_preset("smoluchowski");
    p.u0 = sample_nodal(grid, default_u0);
    p.theta0 = sample_nodal(grid, [](double x, double y) {
        return default_theta0(x, y, 0.0, 0.0);
    });

    MicroSolver solver(p);
    ScalarField u1 = p.u0, t1 = p.theta0;
    MicroSolver solver2(p);
    ScalarField u2 = p.u0, t2 = p.theta0;
    for (int s = 1; s <= 5; ++s) {
        solver.step(u1, t1, s);
        solver2.step(u2, t2, s);
        t2.values = p.theta0.values; // freeze the temperature in the second run
        for (std::size_t i = 0; i < u1.values.size(); ++i)
            CHECK(u1.values[i] == u2.values[i]);
    }
}

TEST_CASE("one step against a dense reference, decoupled terms") {
    const auto g = build_cell_geometry(2, HoleBox{0.25, 0.75}, 4);
    const auto grid = build_perforated_grid(g, 0.5, {1, 1});
    auto p = base_problem(grid, "diag_2_3", "identity");
    p.a = 0.3;
    p.b = 0.5;
    p.g = 0.6;
    p.reaction = reaction_preset("smoluchowski");
    p.source = source_preset("standard");
    p.u0 = sample_nodal(grid, default_u0);
    p.theta0 = sample_nodal(grid, [](double x, double y) {
        return default_theta0(x, y, 0.0, 0.0);
    });
    p.solver.tol = 1e-13;

    MicroSolver solver(p);
    ScalarField u = p.u0, theta = p.theta0;
    solver.step(u, theta, 1);

    // independent dense assembly over the same cells; lumped mass and lumped
    // Robin match the scheme
    const int n = grid.n_nodes;
    const double h = grid.h, dt = p.dt, eps = grid.epsilon;
    oracle::DenseMatrix Au(n, n), At(n, n);
    std::vector<double> vol(n, 0.0);
    const auto kd = oracle::element_stiffness(2.0, 0.0, 3.0);
    const auto kk = oracle::element_stiffness(1.0, 0.0, 1.0);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const std::int32_t c[4] = {grid.nid(ci, cj), grid.nid(ci + 1, cj),
                                       grid.nid(ci + 1, cj + 1), grid.nid(ci, cj + 1)};
            for (int i = 0; i < 4; ++i) {
                vol[c[i]] += h * h / 4.0;
                for (int j = 0; j < 4; ++j) {
                    Au(c[i], c[j]) += dt * kd[i][j];
                    At(c[i], c[j]) += dt * eps * eps * kk[i][j];
                }
            }
        }
    for (int i = 0; i < n; ++i) {
        Au(i, i) += vol[i];
        At(i, i) += vol[i];
    }
    for (const auto& f : grid.pore_facets) {
        const double w = eps * h * 0.5;
        Au(f.na, f.na) += dt * p.a * w;
        Au(f.nb, f.nb) += dt * p.a * w;
        At(f.na, f.na) += dt * p.g * w;
        At(f.nb, f.nb) += dt * p.g * w;
    }
    const auto reaction = reaction_preset("smoluchowski");
    std::vector<double> fu(n, 0.0), ft(n, 0.0);
    for (int i = 0; i < n; ++i) {
        fu[i] = vol[i] * (p.u0.values[i] + dt * reaction(p.u0.values[i]));
        ft[i] = vol[i] * p.theta0.values[i];
    }
    const auto source = source_preset("standard");
    for (const auto& f : grid.pore_facets) {
        const auto& mf = grid.cell.pore_facets[f.micro_facet];
        const auto xa = grid.node_xy(f.na);
        const auto xb = grid.node_xy(f.nb);
        const double va = source(0.0, xa[0], xa[1], mf.ya[0], mf.ya[1]);
        const double vb = source(0.0, xb[0], xb[1], mf.yb[0], mf.yb[1]);
        const double s = eps * h * 0.5;
        fu[f.na] += dt * p.b * s * va;
        fu[f.nb] += dt * p.b * s * vb;
    }
    const auto u_ref = oracle::solve_dense(Au, fu);
    const auto t_ref = oracle::solve_dense(At, ft);
    for (int i = 0; i < n; ++i) {
        CHECK(u.values[i] == doctest::Approx(u_ref[i]).epsilon(1e-10));
        CHECK(theta.values[i] == doctest::Approx(t_ref[i]).epsilon(1e-10));
    }
}

TEST_CASE("one step against a dense reference, cross terms active") {
    const auto g = build_cell_geometry(2, HoleBox{0.25, 0.5}, 4);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto p = base_problem(grid);
    p.tau = 0.4;
    p.mu = 0.6;
    p.delta = 0.3;
    p.u0 = sample_nodal(grid, default_u0);
    p.theta0 = sample_nodal(grid, [](double x, double y) {
        return default_theta0(x, y, 0.25, 0.75);
    });
    p.solver.tol = 1e-13;

    MicroSolver solver(p);
    ScalarField u = p.u0, theta = p.theta0;
    solver.step(u, theta, 1);

    // the ∇^δ fields are shared inputs; assembly and solve are independent
    const auto moll = make_mollifier(p.delta, grid.h);
    MollifiedGradientEvaluator eval(grid, moll, p.lattice_divisor);
    CellVectorField gdt(grid), gdu(grid);
    eval.update(p.theta0);
    eval.eval_cell_centers(gdt);
    eval.update(p.u0);
    eval.eval_cell_centers(gdu);

    const int n = grid.n_nodes;
    const double h = grid.h, dt = p.dt, eps = grid.epsilon;
    oracle::DenseMatrix Au(n, n), At(n, n);
    std::vector<double> vol(n, 0.0);
    const auto kid = oracle::element_stiffness(1.0, 0.0, 1.0);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const std::int32_t c[4] = {grid.nid(ci, cj), grid.nid(ci + 1, cj),
                                       grid.nid(ci + 1, cj + 1), grid.nid(ci, cj + 1)};
            for (int i = 0; i < 4; ++i) {
                vol[c[i]] += h * h / 4.0;
                for (int j = 0; j < 4; ++j) {
                    Au(c[i], c[j]) += dt * kid[i][j];
                    At(c[i], c[j]) += dt * eps * eps * kid[i][j];
                }
            }
        }
    std::vector<double> fu(n, 0.0), ft(n, 0.0);
    for (int i = 0; i < n; ++i) {
        Au(i, i) += vol[i];
        At(i, i) += vol[i];
        fu[i] = vol[i] * p.u0.values[i];
        ft[i] = vol[i] * p.theta0.values[i];
    }
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const std::int32_t c[4] = {grid.nid(ci, cj), grid.nid(ci + 1, cj),
                                       grid.nid(ci + 1, cj + 1), grid.nid(ci, cj + 1)};
            const double u0v[4] = {p.u0.values[c[0]], p.u0.values[c[1]], p.u0.values[c[2]],
                                   p.u0.values[c[3]]};
            const double t0v[4] = {p.theta0.values[c[0]], p.theta0.values[c[1]],
                                   p.theta0.values[c[2]], p.theta0.values[c[3]]};
            const double gux = (u0v[1] + u0v[2] - u0v[0] - u0v[3]) / (2 * h);
            const double guy = (u0v[3] + u0v[2] - u0v[0] - u0v[1]) / (2 * h);
            const double gtx = (t0v[1] + t0v[2] - t0v[0] - t0v[3]) / (2 * h);
            const double gty = (t0v[3] + t0v[2] - t0v[0] - t0v[1]) / (2 * h);
            const auto k = grid.cell_flat(ci, cj);
            const double cross_u = p.tau * eps * (gux * gdt.vx[k] + guy * gdt.vy[k]);
            const double cross_t = p.mu * eps * (gtx * gdu.vx[k] + gty * gdu.vy[k]);
            for (int i = 0; i < 4; ++i) {
                fu[c[i]] += dt * cross_u * h * h / 4.0;
                ft[c[i]] += dt * cross_t * h * h / 4.0;
            }
        }
    const auto u_ref = oracle::solve_dense(Au, fu);
    const auto t_ref = oracle::solve_dense(At, ft);
    for (int i = 0; i < n; ++i) {
        CHECK(u.values[i] == doctest::Approx(u_ref[i]).epsilon(1e-10));
        CHECK(theta.values[i] == doctest::Approx(t_ref[i]).epsilon(1e-10));
    }
}

TEST_CASE("time-step halving shows first order") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    auto make = [&](double dt) {
        auto p = base_problem(grid);
        p.tau = 0.5;
        p.mu = 0.5;
        p.g = 0.5;
        p.b = 0.5;
        p.reaction = reaction_preset("smoluchowski");
        p.source = source_preset("standard");
        p.u0 = sample_nodal(grid, default_u0);
        p.theta0 = sample_nodal(grid, [](double x, double y) {
            return default_theta0(x, y, 0.0, 0.0);
        });
        p.horizon = 0.016;
        p.dt = dt;
        p.snapshot_cadence = 1;
        return p;
    };
    std::vector<double> dts{2e-3, 1e-3, 5e-4};
    std::vector<double> errs;
    for (double dt : dts) {
        const auto a = run_micro(make(dt));
        const auto b = run_micro(make(dt / 2));
        ScalarField diff(grid);
        for (std::size_t i = 0; i < diff.values.size(); ++i)
            diff.values[i] = a.u.back().values[i] - b.u.back().values[i];
        errs.push_back(l2_norm(diff));
    }
    const double rate1 = std::log(errs[0] / errs[1]) / std::log(2.0);
    const double rate2 = std::log(errs[1] / errs[2]) / std::log(2.0);
    CHECK(rate1 >= 0.9);
    CHECK(rate2 >= 0.9);
}

TEST_CASE("invalid problems are rejected") {
    const auto g = build_cell_geometry(2, HoleBox{1.0 / 3.0, 2.0 / 3.0}, 6);
    const auto grid = build_perforated_grid(g, 0.25, {1, 1});
    SUBCASE("negative scalars") {
        auto p = base_problem(grid);
        p.tau = -1.0;
        CHECK_THROWS_AS(validate_micro_problem(p), ParameterError);
    }
    SUBCASE("negative initial data") {
        auto p = base_problem(grid);
        p.u0.values[0] = -1.0;
        CHECK_THROWS_AS(validate_micro_problem(p), ParameterError);
    }
    SUBCASE("cadence must divide the step count") {
        auto p = base_problem(grid);
        p.snapshot_cadence = 3;
        CHECK_THROWS_AS(validate_micro_problem(p), ParameterError);
    }
    SUBCASE("mollifier constraint enforced when cross terms are active") {
        auto p = base_problem(grid);
        p.tau = 0.5;
        p.delta = 0.05;
        CHECK_THROWS_AS(validate_micro_problem(p), ParameterError);
    }
}
