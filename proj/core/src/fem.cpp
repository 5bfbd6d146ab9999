#include "perihom/fem.hpp"

#include "perihom/errors.hpp"
#include "perihom/kahan.hpp"

#include <cmath>

namespace perihom {

namespace {

// corner order: (0,0), (1,0), (1,1), (0,1) on the reference square
void shape(double x, double y, std::array<double, 4>& n) {
    n = {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
}

void shape_grad(double x, double y, std::array<std::array<double, 2>, 4>& g) {
    g[0] = {-(1 - y), -(1 - x)};
    g[1] = {(1 - y), -x};
    g[2] = {y, x};
    g[3] = {-y, 1 - x};
}

constexpr double kGaussA = 0.2113248654051871177; // (1 - 1/sqrt(3)) / 2
constexpr double kGaussB = 0.7886751345948128823;

} // namespace

const std::array<std::array<double, 4>, 4>& ElementMatrices::reference_mass() {
    static const auto mass = [] {
        std::array<std::array<double, 4>, 4> m{};
        const double q[2] = {kGaussA, kGaussB};
        std::array<double, 4> n{};
        for (double qx : q)
            for (double qy : q) {
                shape(qx, qy, n);
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j)
                        m[i][j] += 0.25 * n[i] * n[j];
            }
        return m;
    }();
    return mass;
}

std::array<std::array<double, 4>, 4> ElementMatrices::stiffness(const Sym2& coeff) {
    std::array<std::array<double, 4>, 4> k{};
    const double q[2] = {kGaussA, kGaussB};
    std::array<std::array<double, 2>, 4> g{};
    for (double qx : q)
        for (double qy : q) {
            shape_grad(qx, qy, g);
            for (int i = 0; i < 4; ++i) {
                const auto cg = coeff.apply(g[i][0], g[i][1]);
                for (int j = 0; j < 4; ++j)
                    k[i][j] += 0.25 * (cg[0] * g[j][0] + cg[1] * g[j][1]);
            }
        }
    return k;
}

std::array<std::array<double, 2>, 4> ElementMatrices::gradient_integrals() {
    // \int over the reference element of dNi/dx_c; physical value is h times this
    return {{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
}

std::array<std::int32_t, 4> cell_corners(const PerforatedGrid& grid, int ci, int cj) {
    return {grid.nid(ci, cj), grid.nid(ci + 1, cj), grid.nid(ci + 1, cj + 1),
            grid.nid(ci, cj + 1)};
}

SparseMatrix assemble_mass(const PerforatedGrid& grid) {
    const double h2 = grid.h * grid.h;
    const auto& ref = ElementMatrices::reference_mass();
    TripletAccumulator acc(grid.n_nodes, grid.total_cells() * 16);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc.add(c[i], c[j], h2 * ref[i][j]);
        }
    return acc.compress();
}

std::vector<double> lumped_mass(const PerforatedGrid& grid) {
    std::vector<double> vol(static_cast<std::size_t>(grid.n_nodes), 0.0);
    const double w = grid.h * grid.h * 0.25;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            for (auto c : cell_corners(grid, ci, cj))
                vol[c] += w;
        }
    return vol;
}

SparseMatrix assemble_stiffness(const PerforatedGrid& grid, const CoefficientField& coeff,
                                double scale) {
    const int m = grid.cell.micro_resolution;
    // one exact element block per micro cell of the repeating pattern
    std::vector<std::array<std::array<double, 4>, 4>> blocks(static_cast<std::size_t>(m) * m);
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!grid.cell.material(a, b))
                continue;
            const auto& d = coeff.at_micro_cell(a, b);
            const auto ev = d.eigenvalues();
            if (!(ev[0] > 0.0))
                throw AssemblyError("stiffness coefficient is not elliptic");
            blocks[static_cast<std::size_t>(b) * m + a] = ElementMatrices::stiffness(d);
        }
    TripletAccumulator acc(grid.n_nodes, grid.total_cells() * 16);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto& ke = blocks[static_cast<std::size_t>(cj % m) * m + (ci % m)];
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc.add(c[i], c[j], scale * ke[i][j]);
        }
    return acc.compress();
}

SparseMatrix assemble_stiffness(const PerforatedGrid& grid, const Sym2& coeff, double scale) {
    const auto ev = coeff.eigenvalues();
    if (!(ev[0] > 0.0))
        throw AssemblyError("stiffness coefficient is not elliptic");
    const auto ke = ElementMatrices::stiffness(coeff);
    TripletAccumulator acc(grid.n_nodes, grid.total_cells() * 16);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc.add(c[i], c[j], scale * ke[i][j]);
        }
    return acc.compress();
}

SparseMatrix assemble_robin_boundary(const PerforatedGrid& grid, double coefficient,
                                     std::span<const PerforatedGrid::PoreFacet> facets) {
    // facet-lumped (diagonal): keeps the implicit updates M-matrices
    TripletAccumulator acc(grid.n_nodes, facets.size() * 2);
    const double w = coefficient * grid.epsilon * grid.h * 0.5;
    for (const auto& f : facets) {
        acc.add(f.na, f.na, w);
        acc.add(f.nb, f.nb, w);
    }
    return acc.compress();
}

double integral(const ScalarField& u) {
    const auto& grid = *u.grid;
    const double w = grid.h * grid.h * 0.25;
    KahanSum acc;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            acc.add(w * (u.values[c[0]] + u.values[c[1]] + u.values[c[2]] + u.values[c[3]]));
        }
    return acc.value();
}

double l2_norm(const ScalarField& u) {
    const auto& grid = *u.grid;
    const double h2 = grid.h * grid.h;
    const auto& ref = ElementMatrices::reference_mass();
    KahanSum acc;
    std::array<double, 4> v{};
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                v[i] = u.values[c[i]];
            double q = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    q += ref[i][j] * v[i] * v[j];
            acc.add(h2 * q);
        }
    return std::sqrt(std::max(0.0, acc.value()));
}

double h1_seminorm(const ScalarField& u) {
    const auto& grid = *u.grid;
    static const auto kid = ElementMatrices::stiffness(Sym2{1.0, 0.0, 1.0});
    KahanSum acc;
    std::array<double, 4> v{};
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                v[i] = u.values[c[i]];
            double q = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    q += kid[i][j] * v[i] * v[j];
            acc.add(q);
        }
    return std::sqrt(std::max(0.0, acc.value()));
}

CellVectorField discrete_gradient(const ScalarField& u) {
    const auto& grid = *u.grid;
    CellVectorField g(grid, u.time);
    const double inv2h = 0.5 / grid.h;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            const auto k = grid.cell_flat(ci, cj);
            g.vx[k] = (u.values[c[1]] + u.values[c[2]] - u.values[c[0]] - u.values[c[3]]) * inv2h;
            g.vy[k] = (u.values[c[3]] + u.values[c[2]] - u.values[c[0]] - u.values[c[1]]) * inv2h;
        }
    return g;
}

double l2_norm(const CellVectorField& v) {
    const auto& grid = *v.grid;
    const double h2 = grid.h * grid.h;
    KahanSum acc;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto k = grid.cell_flat(ci, cj);
            acc.add(h2 * (v.vx[k] * v.vx[k] + v.vy[k] * v.vy[k]));
        }
    return std::sqrt(std::max(0.0, acc.value()));
}

double boundary_integral(const BoundaryTrace& t) {
    const double len = t.grid->h;
    KahanSum acc;
    for (const auto& e : t.end_values)
        acc.add(len * 0.5 * (e[0] + e[1]));
    return acc.value();
}

double boundary_l2_norm(const BoundaryTrace& t) {
    const double len = t.grid->h;
    KahanSum acc;
    for (const auto& e : t.end_values)
        acc.add(len * 0.5 * (e[0] * e[0] + e[1] * e[1]));
    return std::sqrt(std::max(0.0, acc.value()));
}

std::vector<double> robin_load(const PerforatedGrid& grid, const BoundaryTrace& w) {
    // facet trapezoid, matching the lumped Robin matrix
    std::vector<double> load(static_cast<std::size_t>(grid.n_nodes), 0.0);
    const double s = grid.epsilon * grid.h * 0.5;
    for (std::size_t k = 0; k < grid.pore_facets.size(); ++k) {
        const auto& f = grid.pore_facets[k];
        load[f.na] += s * w.end_values[k][0];
        load[f.nb] += s * w.end_values[k][1];
    }
    return load;
}

double micro_l2sq(const CellGeometry& g, std::span<const double> slice) {
    const int m = g.micro_resolution;
    const double h2 = 1.0 / (static_cast<double>(m) * m);
    const auto& ref = ElementMatrices::reference_mass();
    KahanSum acc;
    std::array<double, 4> v{};
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!g.material(a, b))
                continue;
            const std::int32_t c[4] = {g.full_id(a, b), g.full_id(a + 1, b),
                                       g.full_id(a + 1, b + 1), g.full_id(a, b + 1)};
            for (int i = 0; i < 4; ++i)
                v[i] = slice[c[i]];
            double q = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    q += ref[i][j] * v[i] * v[j];
            acc.add(h2 * q);
        }
    return acc.value();
}

double micro_h1semisq(const CellGeometry& g, std::span<const double> slice) {
    const int m = g.micro_resolution;
    static const auto kid = ElementMatrices::stiffness(Sym2{1.0, 0.0, 1.0});
    KahanSum acc;
    std::array<double, 4> v{};
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!g.material(a, b))
                continue;
            const std::int32_t c[4] = {g.full_id(a, b), g.full_id(a + 1, b),
                                       g.full_id(a + 1, b + 1), g.full_id(a, b + 1)};
            for (int i = 0; i < 4; ++i)
                v[i] = slice[c[i]];
            double q = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    q += kid[i][j] * v[i] * v[j];
            acc.add(q);
        }
    return acc.value();
}

double micro_integral(const CellGeometry& g, std::span<const double> slice) {
    const int m = g.micro_resolution;
    const double w = 0.25 / (static_cast<double>(m) * m);
    KahanSum acc;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!g.material(a, b))
                continue;
            acc.add(w * (slice[g.full_id(a, b)] + slice[g.full_id(a + 1, b)] +
                         slice[g.full_id(a + 1, b + 1)] + slice[g.full_id(a, b + 1)]));
        }
    return acc.value();
}

} // namespace perihom
