#pragma once

#include "perihom/errors.hpp"
#include "perihom/geometry.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace perihom {

// Nodal Q1 field on the active nodes of a perforated grid.
struct ScalarField {
    const PerforatedGrid* grid = nullptr;
    std::vector<double> values;
    double time = 0.0;

    ScalarField() = default;
    explicit ScalarField(const PerforatedGrid& g, double t = 0.0)
        : grid(&g), values(static_cast<std::size_t>(g.n_nodes), 0.0), time(t) {}
};

// Per-element constant vector field (averaged Q1 gradients live here). Values
// are stored for every fine cell; entries under holes stay zero.
struct CellVectorField {
    const PerforatedGrid* grid = nullptr;
    std::vector<double> vx, vy;
    double time = 0.0;

    CellVectorField() = default;
    explicit CellVectorField(const PerforatedGrid& g, double t = 0.0)
        : grid(&g), vx(g.total_cells(), 0.0), vy(g.total_cells(), 0.0), time(t) {}
};

// Field on the product Ω × Y_*: one micro slice (full node layout) per macro cell.
struct TwoScaleField {
    const TwoScaleIndex* index = nullptr;
    std::vector<double> values;
    double time = 0.0;

    TwoScaleField() = default;
    explicit TwoScaleField(const TwoScaleIndex& idx, double t = 0.0)
        : index(&idx), values(idx.size(), 0.0), time(t) {}

    double& at(int mx, int my, std::int32_t micro_id) {
        return values[index->at(mx, my, micro_id)];
    }
    double at(int mx, int my, std::int32_t micro_id) const {
        return values[index->at(mx, my, micro_id)];
    }
};

// Per-(macro cell, micro cell) constant vector field on Ω × Y_*.
struct TwoScaleCellField {
    const TwoScaleIndex* index = nullptr;
    std::vector<double> vx, vy; // macro-major, m^2 micro cells per macro cell
    double time = 0.0;

    TwoScaleCellField() = default;
    explicit TwoScaleCellField(const TwoScaleIndex& idx, double t = 0.0)
        : index(&idx),
          vx(static_cast<std::size_t>(idx.macro_x) * idx.macro_y * idx.cell->micro_resolution *
                 idx.cell->micro_resolution,
             0.0),
          vy(vx.size(), 0.0), time(t) {}

    std::size_t at(int mx, int my, int ca, int cb) const {
        const int m = index->cell->micro_resolution;
        return (static_cast<std::size_t>(my) * index->macro_x + mx) * m * m +
               static_cast<std::size_t>(cb) * m + ca;
    }
};

// Trace on the pore boundary ∂T_ε: endpoint values per facet.
struct BoundaryTrace {
    const PerforatedGrid* grid = nullptr;
    std::vector<std::array<double, 2>> end_values;

    BoundaryTrace() = default;
    explicit BoundaryTrace(const PerforatedGrid& g)
        : grid(&g), end_values(g.pore_facets.size(), {0.0, 0.0}) {}
};

// Unfolded trace on Ω × ∂T.
struct TwoScaleBoundaryTrace {
    int macro_x = 0, macro_y = 0;
    double epsilon = 0.0;
    const CellGeometry* cell = nullptr;
    std::vector<std::array<double, 2>> end_values; // macro-major, per micro facet

    std::size_t at(int mx, int my, std::int32_t facet) const {
        return (static_cast<std::size_t>(my) * macro_x + mx) * cell->pore_facets.size() + facet;
    }
};

// 2x2 symmetric matrix.
struct Sym2 {
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;

    std::array<double, 2> eigenvalues() const {
        const double tr = a11 + a22;
        const double det = a11 * a22 - a12 * a12;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        return {tr / 2.0 - disc, tr / 2.0 + disc};
    }
    std::array<double, 2> apply(double x, double y) const {
        return {a11 * x + a12 * y, a12 * x + a22 * y};
    }
};

// Piecewise-constant matrix coefficient sampled at micro cell centers; the
// pattern repeats over every ε-copy of the unit cell.
struct CoefficientField {
    const CellGeometry* cell = nullptr;
    std::vector<Sym2> per_micro_cell; // m^2 row-major

    CoefficientField() = default;
    explicit CoefficientField(const CellGeometry& g)
        : cell(&g),
          per_micro_cell(static_cast<std::size_t>(g.micro_resolution) * g.micro_resolution) {}

    const Sym2& at_micro_cell(int a, int b) const {
        return per_micro_cell[static_cast<std::size_t>(b) * cell->micro_resolution + a];
    }
    const Sym2& at_grid_cell(const PerforatedGrid& grid, int ci, int cj) const {
        const int m = grid.cell.micro_resolution;
        return at_micro_cell(ci % m, cj % m);
    }

    // throws AssemblyError when any eigenvalue leaves [lo, hi]
    void check_ellipticity(double lo, double hi) const;
};

// Builds a coefficient field by sampling a callable at micro cell centers and
// validating ellipticity.
template <typename F>
CoefficientField sample_coefficient(const CellGeometry& g, F&& f, double elip_lo,
                                    double elip_hi) {
    CoefficientField c(g);
    const int m = g.micro_resolution;
    const double hm = 1.0 / m;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a)
            c.per_micro_cell[static_cast<std::size_t>(b) * m + a] =
                f((a + 0.5) * hm, (b + 0.5) * hm);
    c.check_ellipticity(elip_lo, elip_hi);
    return c;
}

} // namespace perihom
