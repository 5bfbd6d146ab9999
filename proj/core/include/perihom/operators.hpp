#pragma once

#include "perihom/field.hpp"
#include "perihom/fem.hpp"
#include "perihom/geometry.hpp"
#include "perihom/sparse.hpp"

#include <functional>

namespace perihom {

// Periodic unfolding T_ε: (T u)(x, y) = u(ε[x/ε] + εy). On matched grids this
// is a pure index remap; no interpolation happens anywhere in this module.
TwoScaleField unfold(const ScalarField& u, const TwoScaleIndex& idx);

// unfolded untouched gradient T(∇u), per (macro cell, micro cell)
TwoScaleCellField unfold_gradient(const ScalarField& u, const TwoScaleIndex& idx);

// Boundary unfolding T_ε^b on pore-boundary traces.
TwoScaleBoundaryTrace unfold_boundary(const BoundaryTrace& t);

// restriction of a nodal field to the pore boundary
BoundaryTrace trace_on_pores(const ScalarField& u);

// Folding (averaging) operator F_ε. Two-scale fields are piecewise constant
// in x over macro cells, so the cell average is the stored slice value; the
// half-open anchor [x/ε] picks the owning cell on seams.
ScalarField fold(const TwoScaleField& U, const PerforatedGrid& grid);
CellVectorField fold_cells(const TwoScaleCellField& V, const PerforatedGrid& grid);

// per-(macro, micro cell) averaged gradient in y
TwoScaleCellField grad_y(const TwoScaleField& U);

// Gradient folding operator G_ε: solves
//   (M + ε²K) û = M (F U) + ε B (F ∇_y U)
// so û is the H¹(Ω_ε) representative of U with controlled folding mismatch.
ScalarField gradient_fold(const TwoScaleField& U, const PerforatedGrid& grid,
                          const SolveOptions& opts = {}, SolveStats* stats = nullptr);

// ‖φ‖_ε = ‖φ‖_{L²(Ω_ε)} + ε‖∇φ‖_{L²(Ω_ε)}
double eps_norm(const ScalarField& u);

// matched two-scale norms over Ω × Y_*
double ts_l2_norm(const TwoScaleField& U);
double ts_y_seminorm(const TwoScaleField& U);
// ‖U‖_{L²(Ω;H¹(Y_*))} in the sum convention matching ‖·‖_ε
double ts_h1y_norm_sum(const TwoScaleField& U);
double ts_integral(const TwoScaleField& U);
double ts_l2_norm(const TwoScaleCellField& V);
double ts_boundary_l2_norm(const TwoScaleBoundaryTrace& t);
double ts_boundary_integral(const TwoScaleBoundaryTrace& t);

// pointwise sampling of analytic two-scale data: x at macro cell centers
// (midpoint rule in x), y at micro nodes
TwoScaleField sample_two_scale(const TwoScaleIndex& idx,
                               const std::function<double(double, double, double, double)>& f,
                               double time = 0.0);
ScalarField sample_nodal(const PerforatedGrid& grid,
                         const std::function<double(double, double)>& f, double time = 0.0);

// periodic micro dof vector -> full (m+1)^2 layout slice
std::vector<double> expand_periodic_slice(const CellGeometry& g,
                                          std::span<const double> per_values);

} // namespace perihom
