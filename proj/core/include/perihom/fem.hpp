#pragma once

#include "perihom/field.hpp"
#include "perihom/geometry.hpp"
#include "perihom/sparse.hpp"

#include <array>
#include <span>

namespace perihom {

// Exact Q1 element integrals on a square element (2x2 Gauss, exact for the
// bilinear products involved). The stiffness block is independent of the
// element size in two dimensions; the mass block scales with h^2.
struct ElementMatrices {
    static const std::array<std::array<double, 4>, 4>& reference_mass();
    static std::array<std::array<double, 4>, 4> stiffness(const Sym2& coeff);
    // \int_e dNi/dx_c dx over the reference element, times h; used for
    // mixed gradient loads; scale-free in 2d like the stiffness.
    static std::array<std::array<double, 2>, 4> gradient_integrals();
};

SparseMatrix assemble_mass(const PerforatedGrid& grid);

// nodal volumes (row-sum lumping); the time steppers use these so the
// implicit updates satisfy a discrete maximum principle
std::vector<double> lumped_mass(const PerforatedGrid& grid);

// Bilinear form  scale * \int_{Ω_ε} coeff ∇u · ∇v dx  with the coefficient
// frozen per element.
SparseMatrix assemble_stiffness(const PerforatedGrid& grid, const CoefficientField& coeff,
                                double scale = 1.0);
SparseMatrix assemble_stiffness(const PerforatedGrid& grid, const Sym2& coeff,
                                double scale = 1.0);

// coefficient * ε * \int_{∂T_ε} u v dσ over the given facets
SparseMatrix assemble_robin_boundary(const PerforatedGrid& grid, double coefficient,
                                     std::span<const PerforatedGrid::PoreFacet> facets);

// local corner ids of a fine cell, counterclockwise from the lower-left; -1 never occurs
std::array<std::int32_t, 4> cell_corners(const PerforatedGrid& grid, int ci, int cj);

// quadrature-consistent integrals and norms (Q1 mass / identity stiffness)
double integral(const ScalarField& u);
double l2_norm(const ScalarField& u);
double h1_seminorm(const ScalarField& u);

// per-element averaged Q1 gradient
CellVectorField discrete_gradient(const ScalarField& u);

double l2_norm(const CellVectorField& v);

// trapezoid quadrature over the pore boundary facets
double boundary_integral(const BoundaryTrace& t);
double boundary_l2_norm(const BoundaryTrace& t);

// load vector ε * \int_{∂T_ε} w φ_i dσ from per-facet endpoint values of w
std::vector<double> robin_load(const PerforatedGrid& grid, const BoundaryTrace& w);

// quadrature on micro slices of Y_* (full node layout), matched element-for-
// element with the fine-grid quadrature above so unfolding identities are exact
double micro_l2sq(const CellGeometry& g, std::span<const double> slice);
double micro_h1semisq(const CellGeometry& g, std::span<const double> slice);
double micro_integral(const CellGeometry& g, std::span<const double> slice);

} // namespace perihom
