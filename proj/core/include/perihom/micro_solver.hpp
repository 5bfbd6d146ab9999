#pragma once

#include "perihom/fem.hpp"
#include "perihom/field.hpp"
#include "perihom/geometry.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/sparse.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace perihom {

// Lipschitz reaction with R(s) = 0 for s < 0.
struct Reaction {
    std::string name = "none";
    double lipschitz = 0.0;
    std::function<double(double)> f;

    bool active() const { return static_cast<bool>(f); }
    double operator()(double s) const { return f ? f(s) : 0.0; }
};

// pore-surface data 𝕍(t, x, y)
struct BoundarySource {
    std::string name = "none";
    std::function<double(double, double, double, double, double)> f; // t, x1, x2, y1, y2

    bool active() const { return static_cast<bool>(f); }
    double operator()(double t, double x1, double x2, double y1, double y2) const {
        return f ? f(t, x1, x2, y1, y2) : 0.0;
    }
};

struct MicroProblem {
    const PerforatedGrid* grid = nullptr;
    CoefficientField diffusion;    //  𝔻
    CoefficientField conductivity; //  𝕂
    double tau = 0.0, mu = 0.0, a = 0.0, b = 0.0, g = 0.0;
    double alpha = 1.0, beta = 1.0;
    Reaction reaction;
    BoundarySource source;
    double delta = 0.25;
    ScalarField u0, theta0;
    double horizon = 0.1;
    double dt = 1e-3;
    int snapshot_cadence = 20;
    SolveOptions solver;
    int lattice_divisor = 12;
    double positivity_tol = 1e-10;
};

void validate_micro_problem(const MicroProblem& p);

struct StepDiagnostics {
    int step = 0;
    double t = 0.0;
    double u_min = 0.0, u_max = 0.0, theta_min = 0.0, theta_max = 0.0;
    double u_mass = 0.0, theta_mass = 0.0;
    double residual_u = 0.0, residual_theta = 0.0;
    int iterations_u = 0, iterations_theta = 0;
    double cdelta = 0.0; // measured ‖∇^δ u‖_∞ / ‖u‖_L² when the drift is active
    bool positivity_ok = true;
};

struct MicroTrajectory {
    std::vector<double> snapshot_times;
    std::vector<ScalarField> u;
    std::vector<ScalarField> theta;
    std::vector<StepDiagnostics> diagnostics;
    // max over snapshots of ‖u‖_{H¹} + ε‖∇θ‖, tracked against eq. uniformity
    double sup_h1_indicator = 0.0;
    double measured_cdelta = 0.0;
    bool positivity_violated = false;
    int first_violation_step = -1;
};

// Semi-implicit IMEX stepper: diffusion and Robin terms backward Euler, the
// mollified cross terms and the reaction explicit. The two solves per step
// are decoupled and SPD.
class MicroSolver {
public:
    explicit MicroSolver(const MicroProblem& p);

    // advances (u, θ) by one dt; diagnostics for the step are returned
    StepDiagnostics step(ScalarField& u, ScalarField& theta, int step_index);

    MicroTrajectory run();

private:
    const MicroProblem* p_;
    std::vector<double> volumes_;  // lumped mass
    SparseMatrix system_u_;        // M_L + dt K_D + dt B_a
    SparseMatrix system_theta_;    // M_L + dt ε² K_κ + dt B_g
    Mollifier moll_;
    MollifiedGradientEvaluator eval_;
    CellVectorField grad_delta_u_, grad_delta_theta_;
};

MicroTrajectory run_micro(const MicroProblem& p);

} // namespace perihom
