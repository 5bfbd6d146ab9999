#include "perihom/operators.hpp"

#include "perihom/errors.hpp"
#include "perihom/kahan.hpp"

#include <cmath>

namespace perihom {

namespace {

void require_matching(const TwoScaleIndex& idx, const PerforatedGrid& grid) {
    if (idx.macro_x != grid.macro_x || idx.macro_y != grid.macro_y ||
        idx.cell->micro_resolution != grid.cell.micro_resolution)
        throw PairingError("two-scale index does not match the grid layout");
}

} // namespace

TwoScaleField unfold(const ScalarField& u, const TwoScaleIndex& idx) {
    const auto& grid = *u.grid;
    require_matching(idx, grid);
    const int m = grid.cell.micro_resolution;
    TwoScaleField out(idx, u.time);
    for (int my = 0; my < grid.macro_y; ++my)
        for (int mx = 0; mx < grid.macro_x; ++mx) {
            const int bi = mx * m, bj = my * m;
            for (int b = 0; b <= m; ++b)
                for (int a = 0; a <= m; ++a) {
                    const auto mid = grid.cell.full_id(a, b);
                    if (mid < 0)
                        continue;
                    out.at(mx, my, mid) = u.values[grid.nid(bi + a, bj + b)];
                }
        }
    return out;
}

TwoScaleCellField unfold_gradient(const ScalarField& u, const TwoScaleIndex& idx) {
    const auto& grid = *u.grid;
    require_matching(idx, grid);
    const auto g = discrete_gradient(u);
    const int m = grid.cell.micro_resolution;
    TwoScaleCellField out(idx, u.time);
    for (int my = 0; my < grid.macro_y; ++my)
        for (int mx = 0; mx < grid.macro_x; ++mx)
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) {
                    if (!grid.cell.material(a, b))
                        continue;
                    const auto src = grid.cell_flat(mx * m + a, my * m + b);
                    const auto dst = out.at(mx, my, a, b);
                    out.vx[dst] = g.vx[src];
                    out.vy[dst] = g.vy[src];
                }
    return out;
}

BoundaryTrace trace_on_pores(const ScalarField& u) {
    const auto& grid = *u.grid;
    BoundaryTrace t(grid);
    for (std::size_t k = 0; k < grid.pore_facets.size(); ++k) {
        const auto& f = grid.pore_facets[k];
        t.end_values[k] = {u.values[f.na], u.values[f.nb]};
    }
    return t;
}

TwoScaleBoundaryTrace unfold_boundary(const BoundaryTrace& t) {
    const auto& grid = *t.grid;
    TwoScaleBoundaryTrace out;
    out.macro_x = grid.macro_x;
    out.macro_y = grid.macro_y;
    out.epsilon = grid.epsilon;
    out.cell = &grid.cell;
    out.end_values.assign(static_cast<std::size_t>(grid.macro_x) * grid.macro_y *
                              grid.cell.pore_facets.size(),
                          {0.0, 0.0});
    for (std::size_t k = 0; k < grid.pore_facets.size(); ++k) {
        const auto& f = grid.pore_facets[k];
        const int mx = f.macro_cell % grid.macro_x;
        const int my = f.macro_cell / grid.macro_x;
        out.end_values[out.at(mx, my, f.micro_facet)] = t.end_values[k];
    }
    return out;
}

ScalarField fold(const TwoScaleField& U, const PerforatedGrid& grid) {
    require_matching(*U.index, grid);
    const int m = grid.cell.micro_resolution;
    ScalarField out(grid, U.time);
    for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
        const int gi = grid.node_coord[id][0], gj = grid.node_coord[id][1];
        int mx = gi / m, my = gj / m;
        if (mx >= grid.macro_x)
            mx = grid.macro_x - 1;
        if (my >= grid.macro_y)
            my = grid.macro_y - 1;
        const int a = gi - mx * m, b = gj - my * m;
        out.values[id] = U.at(mx, my, grid.cell.full_id(a, b));
    }
    return out;
}

CellVectorField fold_cells(const TwoScaleCellField& V, const PerforatedGrid& grid) {
    require_matching(*V.index, grid);
    const int m = grid.cell.micro_resolution;
    CellVectorField out(grid, V.time);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto src = V.at(ci / m, cj / m, ci % m, cj % m);
            const auto dst = grid.cell_flat(ci, cj);
            out.vx[dst] = V.vx[src];
            out.vy[dst] = V.vy[src];
        }
    return out;
}

TwoScaleCellField grad_y(const TwoScaleField& U) {
    const auto& idx = *U.index;
    const auto& g = *idx.cell;
    const int m = g.micro_resolution;
    const double inv2h = 0.5 * m;
    TwoScaleCellField out(idx, U.time);
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx)
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) {
                    if (!g.material(a, b))
                        continue;
                    const double v0 = U.at(mx, my, g.full_id(a, b));
                    const double v1 = U.at(mx, my, g.full_id(a + 1, b));
                    const double v2 = U.at(mx, my, g.full_id(a + 1, b + 1));
                    const double v3 = U.at(mx, my, g.full_id(a, b + 1));
                    const auto k = out.at(mx, my, a, b);
                    out.vx[k] = (v1 + v2 - v0 - v3) * inv2h;
                    out.vy[k] = (v3 + v2 - v0 - v1) * inv2h;
                }
    return out;
}

ScalarField gradient_fold(const TwoScaleField& U, const PerforatedGrid& grid,
                          const SolveOptions& opts, SolveStats* stats) {
    const double eps = grid.epsilon;
    const auto fu = fold(U, grid);
    const auto fgy = fold_cells(grad_y(U), grid);

    const auto M = assemble_mass(grid);
    const auto K = assemble_stiffness(grid, Sym2{1.0, 0.0, 1.0}, 1.0);

    std::vector<double> rhs = M.multiply(fu.values);
    const auto gint = ElementMatrices::gradient_integrals();
    const double h = grid.h;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto k = grid.cell_flat(ci, cj);
            const auto c = cell_corners(grid, ci, cj);
            for (int i = 0; i < 4; ++i)
                rhs[c[i]] += eps * h * (fgy.vx[k] * gint[i][0] + fgy.vy[k] * gint[i][1]);
        }

    SparseMatrix A = M;
    A.add_scaled(K, eps * eps);
    ScalarField out(grid, U.time);
    out.values = solve_spd(A, rhs, opts, stats);
    return out;
}

double eps_norm(const ScalarField& u) {
    return l2_norm(u) + u.grid->epsilon * h1_seminorm(u);
}

double ts_l2_norm(const TwoScaleField& U) {
    const auto& idx = *U.index;
    const double e2 = idx.epsilon * idx.epsilon;
    KahanSum acc;
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx) {
            const std::size_t off = idx.at(mx, my, 0);
            acc.add(e2 * micro_l2sq(*idx.cell,
                                    std::span(U.values.data() + off,
                                              static_cast<std::size_t>(idx.n_micro))));
        }
    return std::sqrt(std::max(0.0, acc.value()));
}

double ts_y_seminorm(const TwoScaleField& U) {
    const auto& idx = *U.index;
    const double e2 = idx.epsilon * idx.epsilon;
    KahanSum acc;
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx) {
            const std::size_t off = idx.at(mx, my, 0);
            acc.add(e2 * micro_h1semisq(*idx.cell,
                                        std::span(U.values.data() + off,
                                                  static_cast<std::size_t>(idx.n_micro))));
        }
    return std::sqrt(std::max(0.0, acc.value()));
}

double ts_h1y_norm_sum(const TwoScaleField& U) {
    return ts_l2_norm(U) + ts_y_seminorm(U);
}

double ts_integral(const TwoScaleField& U) {
    const auto& idx = *U.index;
    const double e2 = idx.epsilon * idx.epsilon;
    KahanSum acc;
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx) {
            const std::size_t off = idx.at(mx, my, 0);
            acc.add(e2 * micro_integral(*idx.cell,
                                        std::span(U.values.data() + off,
                                                  static_cast<std::size_t>(idx.n_micro))));
        }
    return acc.value();
}

double ts_l2_norm(const TwoScaleCellField& V) {
    const auto& idx = *V.index;
    const auto& g = *idx.cell;
    const int m = g.micro_resolution;
    const double w = idx.epsilon * idx.epsilon / (static_cast<double>(m) * m);
    KahanSum acc;
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx)
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) {
                    if (!g.material(a, b))
                        continue;
                    const auto k = V.at(mx, my, a, b);
                    acc.add(w * (V.vx[k] * V.vx[k] + V.vy[k] * V.vy[k]));
                }
    return std::sqrt(std::max(0.0, acc.value()));
}

double ts_boundary_l2_norm(const TwoScaleBoundaryTrace& t) {
    const double w = t.epsilon * t.epsilon / t.cell->micro_resolution;
    KahanSum acc;
    for (const auto& e : t.end_values)
        acc.add(w * 0.5 * (e[0] * e[0] + e[1] * e[1]));
    return std::sqrt(std::max(0.0, acc.value()));
}

double ts_boundary_integral(const TwoScaleBoundaryTrace& t) {
    const double w = t.epsilon * t.epsilon / t.cell->micro_resolution;
    KahanSum acc;
    for (const auto& e : t.end_values)
        acc.add(w * 0.5 * (e[0] + e[1]));
    return acc.value();
}

TwoScaleField sample_two_scale(const TwoScaleIndex& idx,
                               const std::function<double(double, double, double, double)>& f,
                               double time) {
    const auto& g = *idx.cell;
    const int m = g.micro_resolution;
    TwoScaleField out(idx, time);
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx) {
            const double cx = (mx + 0.5) * idx.epsilon;
            const double cy = (my + 0.5) * idx.epsilon;
            for (int b = 0; b <= m; ++b)
                for (int a = 0; a <= m; ++a) {
                    const auto mid = g.full_id(a, b);
                    if (mid < 0)
                        continue;
                    out.at(mx, my, mid) =
                        f(cx, cy, static_cast<double>(a) / m, static_cast<double>(b) / m);
                }
        }
    return out;
}

ScalarField sample_nodal(const PerforatedGrid& grid,
                         const std::function<double(double, double)>& f, double time) {
    ScalarField out(grid, time);
    for (std::int32_t id = 0; id < grid.n_nodes; ++id) {
        const auto xy = grid.node_xy(id);
        out.values[id] = f(xy[0], xy[1]);
    }
    return out;
}

std::vector<double> expand_periodic_slice(const CellGeometry& g,
                                          std::span<const double> per_values) {
    const int m = g.micro_resolution;
    std::vector<double> slice(static_cast<std::size_t>(g.n_full_nodes), 0.0);
    for (int b = 0; b <= m; ++b)
        for (int a = 0; a <= m; ++a) {
            const auto fid = g.full_id(a, b);
            if (fid < 0)
                continue;
            const auto pid = g.periodic_id(a, b);
            if (pid >= 0)
                slice[fid] = per_values[pid];
        }
    return slice;
}

} // namespace perihom
