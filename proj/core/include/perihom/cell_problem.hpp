#pragma once

#include "perihom/field.hpp"
#include "perihom/geometry.hpp"
#include "perihom/sparse.hpp"

#include <array>
#include <functional>
#include <vector>

namespace perihom {

// periodic Q1 assembly on the micro grid of Y_* (opposite faces identified)
SparseMatrix assemble_micro_mass_periodic(const CellGeometry& geom);
SparseMatrix assemble_micro_stiffness_periodic(const CellGeometry& geom,
                                               const CoefficientField& coeff);
// coefficient * \int_{∂T} u v dσ(y), facet-lumped
SparseMatrix assemble_micro_robin_periodic(const CellGeometry& geom, double coefficient);

std::vector<double> micro_lumped_mass_periodic(const CellGeometry& geom);

// d_eff with its corrector basis. corrector_full[j] is the periodic solution
// Φ_j expanded to the full (m+1)^2 node layout, mean zero over Y_*.
struct EffectiveTensor {
    Sym2 d_eff;
    std::array<std::vector<double>, 2> corrector_per;
    std::array<std::vector<double>, 2> corrector_full;
    std::array<double, 2> cell_residuals{0.0, 0.0};
    double area_y_star = 1.0;
    double hole_perimeter = 0.0;
};

// Unit-cell problems: for each coordinate direction e_j solve the periodic
// Neumann problem div_y(D(∇Φ_j + e_j)) = 0 in Y_* and assemble
// d_eff[i][j] = ∫_{Y_*} D(∇Φ_j + e_j)·(∇Φ_i + e_i) dy (not averaged).
EffectiveTensor solve_cell_problems(const CellGeometry& geom, const CoefficientField& D,
                                    const SolveOptions& opts = {});

// ∫_{Y_*} D dy, the Φ = 0 upper bound in the minimization
Sym2 voigt_bound(const CellGeometry& geom, const CoefficientField& D);

// Nodal gradient recovery on a hole-free macro grid: centered differences in
// the interior, one-sided at ∂Ω.
struct RecoveredGradient {
    std::vector<double> gx, gy; // per active node
};
RecoveredGradient recovered_gradient(const ScalarField& u);

// First-order corrector U(x, y) = Σ_j ∂_j u(x) Φ_j(y) with ∂u evaluated at
// macro cell centers of the index layout.
TwoScaleField evaluate_corrector(const ScalarField& u, const EffectiveTensor& tensor,
                                 const TwoScaleIndex& idx);

// (1/|∂T|) ∫_{∂T} v(y) dσ(y) by facet trapezoid quadrature
double boundary_average(const CellGeometry& geom,
                        const std::function<double(double, double)>& v_of_y);

} // namespace perihom
