#include "perihom/micro_solver.hpp"

#include "perihom/errors.hpp"

#include <algorithm>
#include <cmath>

namespace perihom {

namespace {

int step_count(double horizon, double dt) {
    const double steps = horizon / dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 || rounded < 1.0)
        throw ParameterError("horizon must be an integer multiple of dt");
    return static_cast<int>(rounded);
}

const MicroProblem& validated(const MicroProblem& p) {
    validate_micro_problem(p);
    return p;
}

} // namespace

void validate_micro_problem(const MicroProblem& p) {
    if (!p.grid)
        throw ParameterError("micro problem has no grid");
    if (p.tau < 0 || p.mu < 0 || p.a < 0 || p.b < 0 || p.g < 0)
        throw ParameterError("tau, mu, a, b, g must be non-negative");
    if (p.alpha < 0 || p.beta < 0)
        throw ParameterError("alpha and beta must be non-negative");
    if (!(p.dt > 0.0) || !(p.horizon > 0.0))
        throw ParameterError("dt and horizon must be positive");
    const int steps = step_count(p.horizon, p.dt);
    if (p.snapshot_cadence < 1 || steps % p.snapshot_cadence != 0)
        throw ParameterError("snapshot cadence must divide the step count");
    if (p.u0.values.size() != static_cast<std::size_t>(p.grid->n_nodes) ||
        p.theta0.values.size() != static_cast<std::size_t>(p.grid->n_nodes))
        throw ParameterError("initial fields do not match the grid");
    for (double v : p.u0.values)
        if (v < -p.positivity_tol)
            throw ParameterError("initial concentration is negative");
    for (double v : p.theta0.values)
        if (v < -p.positivity_tol)
            throw ParameterError("initial temperature is negative");
    if (p.tau > 0 || p.mu > 0)
        require_mollifier(p.delta, p.grid->epsilon, p.grid->cell);
}

MicroSolver::MicroSolver(const MicroProblem& p)
    : p_(&validated(p)), volumes_(lumped_mass(*p.grid)),
      moll_((p.tau > 0 || p.mu > 0) ? make_mollifier(p.delta, p.grid->h) : Mollifier{}),
      eval_(*p.grid, moll_, p.lattice_divisor), grad_delta_u_(*p.grid),
      grad_delta_theta_(*p.grid) {
    const auto& grid = *p.grid;
    const double eps = grid.epsilon;

    TripletAccumulator lumped(grid.n_nodes, volumes_.size());
    for (std::int32_t i = 0; i < grid.n_nodes; ++i)
        lumped.add(i, i, volumes_[i]);

    system_u_ = lumped.compress();
    system_u_.add_scaled(assemble_stiffness(grid, p.diffusion, 1.0), p.dt);
    if (p.a > 0)
        system_u_.add_scaled(assemble_robin_boundary(grid, p.a, grid.pore_facets), p.dt);

    TripletAccumulator lumped2(grid.n_nodes, volumes_.size());
    for (std::int32_t i = 0; i < grid.n_nodes; ++i)
        lumped2.add(i, i, volumes_[i]);
    system_theta_ = lumped2.compress();
    system_theta_.add_scaled(assemble_stiffness(grid, p.conductivity, eps * eps), p.dt);
    if (p.g > 0)
        system_theta_.add_scaled(assemble_robin_boundary(grid, p.g, grid.pore_facets), p.dt);
}

StepDiagnostics MicroSolver::step(ScalarField& u, ScalarField& theta, int step_index) {
    const auto& p = *p_;
    const auto& grid = *p.grid;
    const double eps = grid.epsilon;
    const double dt = p.dt;
    const double t_new = u.time + dt;

    if (p.tau > 0) {
        eval_.update(theta);
        eval_.eval_cell_centers(grad_delta_theta_);
    }
    double cdelta = 0.0;
    if (p.mu > 0) {
        eval_.update(u);
        eval_.eval_cell_centers(grad_delta_u_);
        const double un = l2_norm(u);
        if (un > 0)
            cdelta = eval_.lattice_max_abs() / un;
    }

    // concentration update
    std::vector<double> rhs_u(u.values.size());
    for (std::size_t i = 0; i < rhs_u.size(); ++i)
        rhs_u[i] = volumes_[i] * u.values[i];
    if (p.reaction.active())
        for (std::size_t i = 0; i < rhs_u.size(); ++i)
            rhs_u[i] += dt * volumes_[i] * p.reaction(u.values[i]);
    if (p.tau > 0) {
        const auto gu = discrete_gradient(u);
        const double w = p.tau * std::pow(eps, p.alpha) * grid.h * grid.h * 0.25 * dt;
        for (int cj = 0; cj < grid.cells_y; ++cj)
            for (int ci = 0; ci < grid.cells_x; ++ci) {
                if (!grid.cell_material(ci, cj))
                    continue;
                const auto k = grid.cell_flat(ci, cj);
                const double cross = gu.vx[k] * grad_delta_theta_.vx[k] +
                                     gu.vy[k] * grad_delta_theta_.vy[k];
                const auto c = cell_corners(grid, ci, cj);
                const double add = w * cross;
                rhs_u[c[0]] += add;
                rhs_u[c[1]] += add;
                rhs_u[c[2]] += add;
                rhs_u[c[3]] += add;
            }
    }
    if (p.b > 0 && p.source.active()) {
        BoundaryTrace v(grid);
        for (std::size_t k = 0; k < grid.pore_facets.size(); ++k) {
            const auto& f = grid.pore_facets[k];
            const auto& mf = grid.cell.pore_facets[f.micro_facet];
            const auto xa = grid.node_xy(f.na);
            const auto xb = grid.node_xy(f.nb);
            v.end_values[k] = {p.source(u.time, xa[0], xa[1], mf.ya[0], mf.ya[1]),
                               p.source(u.time, xb[0], xb[1], mf.yb[0], mf.yb[1])};
        }
        const auto load = robin_load(grid, v);
        for (std::size_t i = 0; i < rhs_u.size(); ++i)
            rhs_u[i] += dt * p.b * load[i];
    }
    SolveStats su;
    auto u_new = solve_spd(system_u_, rhs_u, p.solver, &su);

    // temperature update
    std::vector<double> rhs_theta(theta.values.size());
    for (std::size_t i = 0; i < rhs_theta.size(); ++i)
        rhs_theta[i] = volumes_[i] * theta.values[i];
    if (p.mu > 0) {
        const auto gt = discrete_gradient(theta);
        const double w = p.mu * std::pow(eps, p.beta) * grid.h * grid.h * 0.25 * dt;
        for (int cj = 0; cj < grid.cells_y; ++cj)
            for (int ci = 0; ci < grid.cells_x; ++ci) {
                if (!grid.cell_material(ci, cj))
                    continue;
                const auto k = grid.cell_flat(ci, cj);
                const double cross =
                    gt.vx[k] * grad_delta_u_.vx[k] + gt.vy[k] * grad_delta_u_.vy[k];
                const auto c = cell_corners(grid, ci, cj);
                const double add = w * cross;
                rhs_theta[c[0]] += add;
                rhs_theta[c[1]] += add;
                rhs_theta[c[2]] += add;
                rhs_theta[c[3]] += add;
            }
    }
    SolveStats st;
    auto theta_new = solve_spd(system_theta_, rhs_theta, p.solver, &st);

    u.values = std::move(u_new);
    theta.values = std::move(theta_new);
    u.time = theta.time = t_new;

    StepDiagnostics d;
    d.step = step_index;
    d.t = t_new;
    d.u_min = *std::min_element(u.values.begin(), u.values.end());
    d.u_max = *std::max_element(u.values.begin(), u.values.end());
    d.theta_min = *std::min_element(theta.values.begin(), theta.values.end());
    d.theta_max = *std::max_element(theta.values.begin(), theta.values.end());
    d.u_mass = integral(u);
    d.theta_mass = integral(theta);
    d.residual_u = su.relative_residual;
    d.residual_theta = st.relative_residual;
    d.iterations_u = su.iterations;
    d.iterations_theta = st.iterations;
    d.cdelta = cdelta;
    d.positivity_ok =
        d.u_min >= -p.positivity_tol && d.theta_min >= -p.positivity_tol;
    return d;
}

MicroTrajectory MicroSolver::run() {
    const auto& p = *p_;
    const int steps = step_count(p.horizon, p.dt);
    const int per_snap = steps / p.snapshot_cadence;

    ScalarField u = p.u0;
    ScalarField theta = p.theta0;
    u.grid = theta.grid = p.grid;
    u.time = theta.time = 0.0;

    MicroTrajectory traj;
    auto snapshot = [&]() {
        traj.snapshot_times.push_back(u.time);
        traj.u.push_back(u);
        traj.theta.push_back(theta);
        const double ind = std::sqrt(l2_norm(u) * l2_norm(u) + h1_seminorm(u) * h1_seminorm(u)) +
                           p.grid->epsilon * h1_seminorm(theta);
        traj.sup_h1_indicator = std::max(traj.sup_h1_indicator, ind);
    };
    snapshot();

    for (int s = 1; s <= steps; ++s) {
        auto d = step(u, theta, s);
        traj.measured_cdelta = std::max(traj.measured_cdelta, d.cdelta);
        if (!d.positivity_ok && !traj.positivity_violated) {
            traj.positivity_violated = true;
            traj.first_violation_step = s;
        }
        const double hard_floor = -1e3 * p.positivity_tol;
        if (std::min(d.u_min, d.theta_min) < hard_floor)
            throw Error("positivity failure at step " + std::to_string(s) +
                        ": min value " + std::to_string(std::min(d.u_min, d.theta_min)));
        traj.diagnostics.push_back(d);
        if (s % per_snap == 0)
            snapshot();
    }
    return traj;
}

MicroTrajectory run_micro(const MicroProblem& p) {
    MicroSolver solver(p);
    return solver.run();
}

} // namespace perihom
