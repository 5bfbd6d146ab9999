#pragma once

#include "perihom/config.hpp"
#include "perihom/geometry.hpp"
#include "perihom/limit_solver.hpp"
#include "perihom/micro_solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace perihom {

// The four error components of the main corrector estimate. L∞-in-time terms
// are maxima over snapshots, L²-in-time terms left-endpoint rectangle sums.
struct ErrorFunctional {
    double e1 = 0.0; // sup_t ‖T u_ε − u‖
    double e2 = 0.0; // ‖T(∇u_ε) − (∇u + ∇_y U)‖_{L²(0,T)}
    double e3 = 0.0; // sup_t ‖T θ_ε − Θ‖
    double e4 = 0.0; // ‖T(ε∇θ_ε) − ∇_y Θ‖_{L²(0,T)}
    double total() const { return e1 + e2 + e3 + e4; }
};

// Pairs one ε-run with the limit layout: every ε-cell is a whole number of
// limit cells, so no interpolation is involved.
class TrajectoryComparator {
public:
    TrajectoryComparator(const PerforatedGrid& micro_grid, const PerforatedGrid& macro_grid,
                         const EffectiveTensor& tensor);

    struct SnapshotTerms {
        double u_l2 = 0.0;
        double grad_u = 0.0;
        double theta_l2 = 0.0;
        double grad_theta = 0.0;
    };

    SnapshotTerms compare(const ScalarField& u_eps, const ScalarField& theta_eps,
                          const ScalarField& u_lim, std::span<const double> theta_lim) const;

    // ‖T u⁰_ε − u⁰‖ + ‖T θ⁰_ε − Θ⁰‖
    double initial_gap(const ScalarField& u0_eps, const ScalarField& theta0_eps,
                       const ScalarField& u0_lim, std::span<const double> theta0_lim) const;

    const TwoScaleIndex& index() const { return idx_; }

private:
    const PerforatedGrid* micro_grid_;
    const PerforatedGrid* macro_grid_;
    const EffectiveTensor* tensor_;
    TwoScaleIndex idx_;
    int ratio_ = 1; // limit cells per ε-cell edge
    // corrector element gradients per micro cell
    std::vector<double> phi_gx_[2], phi_gy_[2];
};

ErrorFunctional error_functional(const MicroTrajectory& micro, const LimitTrajectory& limit,
                                 const TrajectoryComparator& cmp);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // rms of log-space fit residuals
    int points_used = 0;
    std::vector<std::string> notes;
};

// least squares on (log ε, log E); zero errors are dropped with a note
RateFit fit_rate(std::span<const std::pair<double, double>> points);

// operator-algebra exactness suite (unfolding identities on random fields)
struct ExactnessCheck {
    std::string name;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};
std::vector<ExactnessCheck> ops_exactness_suite(const CellGeometry& geom,
                                                std::span<const int> inv_epsilons,
                                                std::uint64_t seed);

// auxiliary corrector-estimate rates on smooth probe fields
struct AuxiliaryRates {
    std::vector<double> epsilons;
    std::vector<double> refold_error;   // ‖T F U − U‖
    std::vector<double> unfold_error; // ‖T u − u‖
    std::vector<double> folding_mismatch;      // ‖G U − F U‖ + ‖ε∇G U − F(∇_y U)‖
    std::vector<double> mollifier_commutation;    // sup |T(∇^δ u) − ∇^δ u|
    RateFit fit_refold, fit_unfold, fit_mismatch, fit_mollifier;
};
AuxiliaryRates auxiliary_rates(const CellGeometry& geom, std::span<const int> inv_epsilons,
                               double delta);

// one ε-point of a study
struct EpsilonResult {
    int inv_epsilon = 0;
    ErrorFunctional errors;
    double initial_gap = 0.0;
    double sup_h1_indicator = 0.0;
    double measured_cdelta = 0.0;
    bool positivity_violated = false;
    double runtime_seconds = 0.0;
};

struct StudyVariant {
    int sign_exchange = +1;
    std::vector<EpsilonResult> points; // ascending ε
    RateFit fit_total, fit_e1, fit_e2, fit_e3, fit_e4, fit_initial_gap;
};

struct ConvergenceReport {
    std::string config_hash;
    std::string resolved_config; // canonical serialization
    std::vector<std::string> warnings;
    double dt = 0.0;
    Sym2 d_eff;
    double area_y_star = 1.0;
    double hole_perimeter = 0.0;
    std::array<double, 2> cell_residuals{0.0, 0.0};
    std::vector<StudyVariant> variants;
    AuxiliaryRates aux;
    double total_runtime_seconds = 0.0; // zero in deterministic mode
};

ConvergenceReport run_study(const RunConfig& config);

std::string report_to_json(const ConvergenceReport& report);
// (epsilon, e1..e4, total) rows for the first variant
std::string report_rates_csv(const ConvergenceReport& report);
// (epsilon, refold_error, unfold_error, mollifier_commutation, folding_mismatch)
std::string report_aux_csv(const ConvergenceReport& report);

} // namespace perihom
