#pragma once

#include "perihom/cell_problem.hpp"
#include "perihom/fem.hpp"
#include "perihom/field.hpp"
#include "perihom/geometry.hpp"
#include "perihom/micro_solver.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/sparse.hpp"

#include <vector>

namespace perihom {

// Two-scale limit system: macroscopic u on Ω with the effective tensor, and
// Θ(x, y) on Ω × Y_* with one periodic micro field per macro cell.
struct LimitProblem {
    const PerforatedGrid* macro_grid = nullptr; // hole-free, spacing = finest paired ε
    const CellGeometry* cell = nullptr;
    EffectiveTensor tensor;
    CoefficientField conductivity; // 𝕂 on the micro grid
    double mu = 0.0, a = 0.0, b = 0.0, g = 0.0;
    int sign_exchange = +1; // sign of the (|∂T|/|Y_*|)(a u + b v0) load
    Reaction reaction;
    BoundarySource source;
    double delta = 0.25;
    ScalarField u0;
    std::vector<double> theta0; // macro-cell-major periodic dof values
    double horizon = 0.1;
    double dt = 1e-3;
    int snapshot_cadence = 20;
    SolveOptions solver;
    int lattice_divisor = 12;
    double positivity_tol = 1e-10;
    int workers = 0; // Θ slices advance concurrently; 0 = hardware

    std::size_t theta_cells() const {
        return static_cast<std::size_t>(macro_grid->cells_x) * macro_grid->cells_y;
    }
    // |∂T| / |Y_*|, from the geometry
    double exchange_ratio() const { return cell->hole_perimeter / cell->area_y_star; }
};

void validate_limit_problem(const LimitProblem& p);

struct LimitStepDiagnostics {
    int step = 0;
    double t = 0.0;
    double u_min = 0.0, u_max = 0.0, theta_min = 0.0, theta_max = 0.0;
    double u_mass = 0.0;
    // discrete defect of d/dt ∫u = ∫R(u) + sign ρ ∫(a u + b v0)
    double mass_balance_defect = 0.0;
    double residual_u = 0.0;
    int iterations_u = 0;
};

struct LimitTrajectory {
    std::vector<double> snapshot_times;
    std::vector<ScalarField> u;
    std::vector<std::vector<double>> theta; // per snapshot, macro-major periodic dofs
    std::vector<LimitStepDiagnostics> diagnostics;
};

class LimitSolver {
public:
    explicit LimitSolver(const LimitProblem& p);

    LimitStepDiagnostics step(ScalarField& u, std::vector<double>& theta, int step_index);
    LimitTrajectory run();

    // one backward-Euler update of a single macro cell's Θ slice; exposed so the
    // per-cell independence is testable directly
    void advance_theta_slice(std::span<const double> theta_old, std::span<double> theta_new,
                             const std::array<double, 2>& grad_delta_u) const;

    // nodal boundary average v0(t, x) of the source
    std::vector<double> boundary_average_nodal(double t) const;

private:
    const LimitProblem* p_;
    std::vector<double> macro_volumes_;
    SparseMatrix system_u_; // M_L + (dt/|Y_*|) K_deff
    std::vector<double> micro_volumes_;
    SparseMatrix system_theta_; // M_y + dt (K_κ + B_g)
    Mollifier moll_;
    MollifiedGradientEvaluator eval_;
};

LimitTrajectory run_limit(const LimitProblem& p);

// corrector snapshot U = Σ_j ∂_j u Φ_j for a stored limit snapshot
TwoScaleField corrector_snapshot(const LimitProblem& p, const ScalarField& u,
                                 const TwoScaleIndex& idx);

// Θ snapshot expanded from periodic dofs to the full two-scale layout
TwoScaleField theta_snapshot(const LimitProblem& p, std::span<const double> theta,
                             const TwoScaleIndex& idx, double time);

} // namespace perihom
