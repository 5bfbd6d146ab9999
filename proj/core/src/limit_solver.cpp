#include "perihom/limit_solver.hpp"

#include "perihom/errors.hpp"
#include "perihom/kahan.hpp"
#include "perihom/operators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace perihom {

namespace {

int step_count(double horizon, double dt) {
    const double steps = horizon / dt;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 || rounded < 1.0)
        throw ParameterError("horizon must be an integer multiple of dt");
    return static_cast<int>(rounded);
}

const LimitProblem& validated(const LimitProblem& p) {
    validate_limit_problem(p);
    return p;
}

} // namespace

void validate_limit_problem(const LimitProblem& p) {
    if (!p.macro_grid || !p.cell)
        throw ParameterError("limit problem needs a macro grid and a cell geometry");
    if (p.macro_grid->cell.hole)
        throw ParameterError("macro grid of the limit problem must be hole-free");
    if (p.mu < 0 || p.a < 0 || p.b < 0 || p.g < 0)
        throw ParameterError("mu, a, b, g must be non-negative");
    if (p.sign_exchange != 1 && p.sign_exchange != -1)
        throw ParameterError("sign_limit_exchange must be +1 or -1");
    const int steps = step_count(p.horizon, p.dt);
    if (p.snapshot_cadence < 1 || steps % p.snapshot_cadence != 0)
        throw ParameterError("snapshot cadence must divide the step count");
    if (p.u0.values.size() != static_cast<std::size_t>(p.macro_grid->n_nodes))
        throw ParameterError("limit initial u does not match the macro grid");
    if (p.theta0.size() != p.theta_cells() * p.cell->n_periodic_dofs)
        throw ParameterError("limit initial Theta does not match the layout");
}

LimitSolver::LimitSolver(const LimitProblem& p)
    : p_(&validated(p)), macro_volumes_(lumped_mass(*p.macro_grid)),
      micro_volumes_(micro_lumped_mass_periodic(*p.cell)),
      moll_(p.mu > 0 ? make_mollifier(p.delta, p.macro_grid->h) : Mollifier{}),
      eval_(*p.macro_grid, moll_, p.lattice_divisor) {
    TripletAccumulator lumped_x(p.macro_grid->n_nodes);
    for (std::int32_t i = 0; i < p.macro_grid->n_nodes; ++i)
        lumped_x.add(i, i, macro_volumes_[i]);
    system_u_ = lumped_x.compress();
    system_u_.add_scaled(assemble_stiffness(*p.macro_grid, p.tensor.d_eff, 1.0),
                         p.dt / p.cell->area_y_star);

    TripletAccumulator lumped_y(p.cell->n_periodic_dofs);
    for (std::int32_t i = 0; i < p.cell->n_periodic_dofs; ++i)
        lumped_y.add(i, i, micro_volumes_[i]);
    system_theta_ = lumped_y.compress();
    SparseMatrix ky = assemble_micro_stiffness_periodic(*p.cell, p.conductivity);
    if (p.g > 0)
        ky.add_scaled(assemble_micro_robin_periodic(*p.cell, p.g), 1.0);
    system_theta_.add_scaled(ky, p.dt);
}

std::vector<double> LimitSolver::boundary_average_nodal(double t) const {
    const auto& p = *p_;
    const auto& grid = *p.macro_grid;
    std::vector<double> v0(static_cast<std::size_t>(grid.n_nodes), 0.0);
    if (!p.source.active() || p.cell->pore_facets.empty())
        return v0;
    for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
        const auto xy = grid.node_xy(id);
        v0[id] = boundary_average(
            *p.cell, [&](double y1, double y2) { return p.source(t, xy[0], xy[1], y1, y2); });
    }
    return v0;
}

void LimitSolver::advance_theta_slice(std::span<const double> theta_old,
                                      std::span<double> theta_new,
                                      const std::array<double, 2>& grad_delta_u) const {
    const auto& p = *p_;
    const auto& g = *p.cell;
    const int m = g.micro_resolution;

    std::vector<double> rhs(theta_old.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = micro_volumes_[i] * theta_old[i];
    if (p.mu > 0) {
        // explicit drift  μ ∇_y Θ · ∇^δ u(x)
        const double w = p.mu * p.dt * 0.25 / (static_cast<double>(m) * m);
        const double inv2h = 0.5 * m;
        for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a) {
                if (!g.material(a, b))
                    continue;
                const std::int32_t c[4] = {g.periodic_id(a, b), g.periodic_id(a + 1, b),
                                           g.periodic_id(a + 1, b + 1), g.periodic_id(a, b + 1)};
                const double v0 = theta_old[c[0]], v1 = theta_old[c[1]], v2 = theta_old[c[2]],
                             v3 = theta_old[c[3]];
                const double gx = (v1 + v2 - v0 - v3) * inv2h;
                const double gy = (v3 + v2 - v0 - v1) * inv2h;
                const double add = w * (gx * grad_delta_u[0] + gy * grad_delta_u[1]);
                rhs[c[0]] += add;
                rhs[c[1]] += add;
                rhs[c[2]] += add;
                rhs[c[3]] += add;
            }
    }
    auto sol = solve_spd(system_theta_, rhs, p.solver);
    std::copy(sol.begin(), sol.end(), theta_new.begin());
}

LimitStepDiagnostics LimitSolver::step(ScalarField& u, std::vector<double>& theta,
                                       int step_index) {
    const auto& p = *p_;
    const auto& grid = *p.macro_grid;
    const double dt = p.dt;
    const double rho = p.exchange_ratio();
    const double t_old = u.time;

    // macroscopic update
    std::vector<double> forcing(u.values.size(), 0.0);
    if (p.reaction.active())
        for (std::size_t i = 0; i < forcing.size(); ++i)
            forcing[i] += p.reaction(u.values[i]);
    if (p.a > 0 || (p.b > 0 && p.source.active())) {
        const auto v0 = boundary_average_nodal(t_old);
        for (std::size_t i = 0; i < forcing.size(); ++i)
            forcing[i] += p.sign_exchange * rho * (p.a * u.values[i] + p.b * v0[i]);
    }
    std::vector<double> rhs(u.values.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = macro_volumes_[i] * (u.values[i] + dt * forcing[i]);
    SolveStats su;
    auto u_new = solve_spd(system_u_, rhs, p.solver, &su);

    // per-cell Θ dynamics, old-state drift; slices are independent and write
    // disjoint ranges, so results do not depend on the worker count
    if (p.mu > 0)
        eval_.update(u);
    const int nper = p.cell->n_periodic_dofs;
    const std::size_t ncells = grid.total_cells();
    std::vector<double> theta_new(theta.size());
    auto advance_cell = [&](std::size_t cellk) {
        const int ci = static_cast<int>(cellk % grid.cells_x);
        const int cj = static_cast<int>(cellk / grid.cells_x);
        std::array<double, 2> gd{0.0, 0.0};
        if (p.mu > 0)
            gd = eval_.eval((ci + 0.5) * grid.h, (cj + 0.5) * grid.h);
        advance_theta_slice(std::span(theta.data() + cellk * nper, nper),
                            std::span(theta_new.data() + cellk * nper, nper), gd);
    };
    unsigned workers = p.workers > 0 ? static_cast<unsigned>(p.workers)
                                     : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, 8));
    if (workers == 1 || ncells < 64) {
        for (std::size_t cellk = 0; cellk < ncells; ++cellk)
            advance_cell(cellk);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t cellk = next.fetch_add(1);
                    if (cellk >= ncells)
                        return;
                    advance_cell(cellk);
                }
            });
        for (auto& th : pool)
            th.join();
    }

    LimitStepDiagnostics d;
    d.step = step_index;
    d.t = t_old + dt;
    {
        ScalarField tmp_old = u;
        ScalarField tmp_new = u;
        tmp_new.values = u_new;
        const double dmass = (integral(tmp_new) - integral(tmp_old)) / dt;
        ScalarField f = u;
        f.values = forcing;
        d.mass_balance_defect = dmass - integral(f);
    }
    u.values = std::move(u_new);
    theta = std::move(theta_new);
    u.time = d.t;

    d.u_min = *std::min_element(u.values.begin(), u.values.end());
    d.u_max = *std::max_element(u.values.begin(), u.values.end());
    d.theta_min = *std::min_element(theta.begin(), theta.end());
    d.theta_max = *std::max_element(theta.begin(), theta.end());
    d.u_mass = integral(u);
    d.residual_u = su.relative_residual;
    d.iterations_u = su.iterations;
    return d;
}

LimitTrajectory LimitSolver::run() {
    const auto& p = *p_;
    const int steps = step_count(p.horizon, p.dt);
    const int per_snap = steps / p.snapshot_cadence;

    ScalarField u = p.u0;
    u.grid = p.macro_grid;
    u.time = 0.0;
    std::vector<double> theta = p.theta0;

    LimitTrajectory traj;
    auto snapshot = [&]() {
        traj.snapshot_times.push_back(u.time);
        traj.u.push_back(u);
        traj.theta.push_back(theta);
    };
    snapshot();
    for (int s = 1; s <= steps; ++s) {
        traj.diagnostics.push_back(step(u, theta, s));
        if (s % per_snap == 0)
            snapshot();
    }
    return traj;
}

LimitTrajectory run_limit(const LimitProblem& p) {
    LimitSolver solver(p);
    return solver.run();
}

TwoScaleField corrector_snapshot(const LimitProblem& p, const ScalarField& u,
                                 const TwoScaleIndex& idx) {
    return evaluate_corrector(u, p.tensor, idx);
}

TwoScaleField theta_snapshot(const LimitProblem& p, std::span<const double> theta,
                             const TwoScaleIndex& idx, double time) {
    const auto& grid = *p.macro_grid;
    if (idx.macro_x != grid.cells_x || idx.macro_y != grid.cells_y)
        throw PairingError("theta snapshot expects one macro cell per grid cell");
    const int nper = p.cell->n_periodic_dofs;
    TwoScaleField out(idx, time);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            const std::size_t cellk = grid.cell_flat(ci, cj);
            const auto slice = expand_periodic_slice(
                *p.cell, std::span(theta.data() + cellk * nper,
                                   static_cast<std::size_t>(nper)));
            const std::size_t off = idx.at(ci, cj, 0);
            std::copy(slice.begin(), slice.end(), out.values.begin() + off);
        }
    return out;
}

} // namespace perihom
