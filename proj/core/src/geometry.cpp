#include "perihom/geometry.hpp"

#include "perihom/errors.hpp"

#include <cmath>
#include <cstdio>
#include <queue>

namespace perihom {

namespace {

// hole coordinates must sit exactly on the micro grid
int to_grid_index(double coord, int m, const char* what) {
    const double scaled = coord * m;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9 * m)
        throw AlignmentError(std::string(what) +
                             " does not align with the micro grid: " + std::to_string(coord) +
                             " * m is not an integer");
    return static_cast<int>(rounded);
}

} // namespace

CellGeometry build_cell_geometry(int dim, std::optional<HoleBox> hole, int micro_resolution) {
    if (dim != 2)
        throw ParameterError("only dim = 2 is supported");
    // hole-free cells may degenerate to a single micro cell (macro grids)
    if (micro_resolution < 1 || (hole && micro_resolution < 2))
        throw ParameterError("micro_resolution too small to resolve the cell");

    CellGeometry g;
    g.dim = dim;
    g.hole = hole;
    g.micro_resolution = micro_resolution;
    const int m = micro_resolution;

    if (hole) {
        if (!(hole->lo < hole->hi))
            throw GeometryError("hole box is empty or inverted");
        g.hole_lo_cell = to_grid_index(hole->lo, m, "hole lower bound");
        g.hole_hi_cell = to_grid_index(hole->hi, m, "hole upper bound");
        if (g.hole_lo_cell <= 0 || g.hole_hi_cell >= m)
            throw GeometryError("hole touches the boundary of Y; not admissible");
    } else {
        g.hole_lo_cell = g.hole_hi_cell = 0;
    }

    g.cell_material.assign(static_cast<std::size_t>(m) * m, 1);
    if (hole) {
        for (int b = g.hole_lo_cell; b < g.hole_hi_cell; ++b)
            for (int a = g.hole_lo_cell; a < g.hole_hi_cell; ++a)
                g.cell_material[static_cast<std::size_t>(b) * m + a] = 0;
    }

    g.n_material_cells = 0;
    for (auto v : g.cell_material)
        g.n_material_cells += v;
    g.area_y_star = static_cast<double>(g.n_material_cells) / (static_cast<double>(m) * m);

    // connectivity of Y_*: flood fill over material cells, 4-adjacency
    if (g.n_material_cells == 0)
        throw GeometryError("Y_* is empty");
    {
        std::vector<std::uint8_t> seen(g.cell_material.size(), 0);
        std::queue<std::array<int, 2>> q;
        for (int b = 0; b < m && q.empty(); ++b)
            for (int a = 0; a < m && q.empty(); ++a)
                if (g.material(a, b)) {
                    q.push({a, b});
                    seen[static_cast<std::size_t>(b) * m + a] = 1;
                }
        int reached = 0;
        while (!q.empty()) {
            auto [a, b] = q.front();
            q.pop();
            ++reached;
            const int da[4] = {1, -1, 0, 0};
            const int db[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int na = a + da[k], nb = b + db[k];
                if (na < 0 || nb < 0 || na >= m || nb >= m)
                    continue;
                auto& s = seen[static_cast<std::size_t>(nb) * m + na];
                if (!s && g.material(na, nb)) {
                    s = 1;
                    q.push({na, nb});
                }
            }
        }
        if (reached != g.n_material_cells)
            throw GeometryError("Y_* is not connected");
    }

    // full corner layout
    g.full_node_id.assign(static_cast<std::size_t>(m + 1) * (m + 1), -1);
    auto touches_material = [&](int a, int b) {
        for (int db = -1; db <= 0; ++db)
            for (int da = -1; da <= 0; ++da) {
                const int ca = a + da, cb = b + db;
                if (ca < 0 || cb < 0 || ca >= m || cb >= m)
                    continue;
                if (g.material(ca, cb))
                    return true;
            }
        return false;
    };
    g.n_full_nodes = 0;
    for (int b = 0; b <= m; ++b)
        for (int a = 0; a <= m; ++a)
            if (touches_material(a, b))
                g.full_node_id[static_cast<std::size_t>(b) * (m + 1) + a] = g.n_full_nodes++;

    // periodic layout: wrap-adjacent material cells activate a base node
    g.periodic_dof_id.assign(static_cast<std::size_t>(m) * m, -1);
    auto touches_material_wrapped = [&](int a, int b) {
        for (int db = -1; db <= 0; ++db)
            for (int da = -1; da <= 0; ++da) {
                const int ca = ((a + da) % m + m) % m;
                const int cb = ((b + db) % m + m) % m;
                if (g.material(ca, cb))
                    return true;
            }
        return false;
    };
    g.n_periodic_dofs = 0;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a)
            if (touches_material_wrapped(a, b))
                g.periodic_dof_id[static_cast<std::size_t>(b) * m + a] = g.n_periodic_dofs++;

    // discrete ∂T: edges between a material and a hole cell
    if (hole) {
        const double hm = 1.0 / m;
        const int lo = g.hole_lo_cell, hi = g.hole_hi_cell;
        auto add_facet = [&](int a0, int b0, int a1, int b1) {
            MicroFacet f;
            f.full_a = g.full_id(a0, b0);
            f.full_b = g.full_id(a1, b1);
            f.per_a = g.periodic_id(a0, b0);
            f.per_b = g.periodic_id(a1, b1);
            f.ya = {a0 * hm, b0 * hm};
            f.yb = {a1 * hm, b1 * hm};
            g.pore_facets.push_back(f);
        };
        for (int a = lo; a < hi; ++a) {
            add_facet(a, lo, a + 1, lo); // bottom side
            add_facet(a, hi, a + 1, hi); // top side
        }
        for (int b = lo; b < hi; ++b) {
            add_facet(lo, b, lo, b + 1); // left side
            add_facet(hi, b, hi, b + 1); // right side
        }
        g.hole_perimeter = static_cast<double>(g.pore_facets.size()) / m;
    }

    return g;
}

PerforatedGrid build_perforated_grid(const CellGeometry& geom, double epsilon,
                                     std::array<int, 2> lengths) {
    if (!(epsilon > 0.0))
        throw ParameterError("epsilon must be positive");
    const double inv = 1.0 / epsilon;
    const double rounded = std::round(inv);
    if (std::abs(inv - rounded) > 1e-9 || rounded < 2.0)
        throw ParameterError("1/epsilon must be an integer >= 2, got epsilon = " +
                             std::to_string(epsilon));
    if (lengths[0] < 1 || lengths[1] < 1)
        throw ParameterError("domain lengths must be positive integers");

    PerforatedGrid grid;
    grid.cell = geom;
    grid.epsilon = epsilon;
    grid.n_per_unit = static_cast<int>(rounded);
    grid.lengths = lengths;
    const int m = geom.micro_resolution;
    grid.macro_x = lengths[0] * grid.n_per_unit;
    grid.macro_y = lengths[1] * grid.n_per_unit;
    grid.cells_x = grid.macro_x * m;
    grid.cells_y = grid.macro_y * m;
    grid.h = epsilon / m;

    const int nx = grid.cells_x + 1, ny = grid.cells_y + 1;
    grid.node_id.assign(static_cast<std::size_t>(nx) * ny, -1);
    auto material = [&](int ci, int cj) { return grid.cell_material(ci, cj); };
    grid.n_nodes = 0;
    for (int gj = 0; gj < ny; ++gj)
        for (int gi = 0; gi < nx; ++gi) {
            bool active = false;
            for (int dj = -1; dj <= 0 && !active; ++dj)
                for (int di = -1; di <= 0 && !active; ++di) {
                    const int ci = gi + di, cj = gj + dj;
                    if (ci < 0 || cj < 0 || ci >= grid.cells_x || cj >= grid.cells_y)
                        continue;
                    if (material(ci, cj))
                        active = true;
                }
            if (active) {
                grid.node_id[static_cast<std::size_t>(gj) * nx + gi] = grid.n_nodes++;
                grid.node_coord.push_back({gi, gj});
            }
        }

    // pore facets: one copy of the micro ∂T per ε-cell
    grid.pore_facets.reserve(static_cast<std::size_t>(grid.macro_x) * grid.macro_y *
                             geom.pore_facets.size());
    for (int my = 0; my < grid.macro_y; ++my)
        for (int mx = 0; mx < grid.macro_x; ++mx) {
            const int base_i = mx * m, base_j = my * m;
            for (std::size_t k = 0; k < geom.pore_facets.size(); ++k) {
                const auto& f = geom.pore_facets[k];
                const int a0 = static_cast<int>(std::lround(f.ya[0] * m));
                const int b0 = static_cast<int>(std::lround(f.ya[1] * m));
                const int a1 = static_cast<int>(std::lround(f.yb[0] * m));
                const int b1 = static_cast<int>(std::lround(f.yb[1] * m));
                PerforatedGrid::PoreFacet pf;
                pf.na = grid.nid(base_i + a0, base_j + b0);
                pf.nb = grid.nid(base_i + a1, base_j + b1);
                pf.macro_cell = static_cast<std::int32_t>(grid.macro_flat(mx, my));
                pf.micro_facet = static_cast<std::int32_t>(k);
                grid.pore_facets.push_back(pf);
            }
        }

    for (int gi = 0; gi < grid.cells_x; ++gi) {
        grid.exterior_facets.push_back({grid.nid(gi, 0), grid.nid(gi + 1, 0)});
        grid.exterior_facets.push_back({grid.nid(gi, grid.cells_y), grid.nid(gi + 1, grid.cells_y)});
    }
    for (int gj = 0; gj < grid.cells_y; ++gj) {
        grid.exterior_facets.push_back({grid.nid(0, gj), grid.nid(0, gj + 1)});
        grid.exterior_facets.push_back({grid.nid(grid.cells_x, gj), grid.nid(grid.cells_x, gj + 1)});
    }

    const double cell_area = grid.h * grid.h;
    std::size_t n_material = 0;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci)
            if (material(ci, cj))
                ++n_material;
    grid.measure_omega_eps = static_cast<double>(n_material) * cell_area;
    grid.measure_pores = (grid.total_cells() - n_material) * cell_area;

    const double omega = static_cast<double>(lengths[0]) * lengths[1];
    if (std::abs(grid.measure_omega_eps - omega * geom.area_y_star) > 1e-12 * omega)
        throw GeometryError("volume identity |Omega_eps| = |Omega||Y_*| violated");

    return grid;
}

TwoScaleIndex make_two_scale_index(const PerforatedGrid& grid) {
    TwoScaleIndex idx;
    idx.macro_x = grid.macro_x;
    idx.macro_y = grid.macro_y;
    idx.epsilon = grid.epsilon;
    idx.cell = &grid.cell;
    idx.n_micro = grid.cell.n_full_nodes;
    return idx;
}

TwoScaleIndex make_two_scale_index(int macro_x, int macro_y, double epsilon,
                                   const CellGeometry& cell) {
    TwoScaleIndex idx;
    idx.macro_x = macro_x;
    idx.macro_y = macro_y;
    idx.epsilon = epsilon;
    idx.cell = &cell;
    idx.n_micro = cell.n_full_nodes;
    return idx;
}

std::string dump_grid(const PerforatedGrid& grid) {
    std::string out;
    char line[128];
    const int nx = grid.cells_x + 1, ny = grid.cells_y + 1;
    std::snprintf(line, sizeof(line), "# nodes %d x %d active %d\n", nx, ny, grid.n_nodes);
    out += line;
    for (int gj = 0; gj < ny; ++gj)
        for (int gi = 0; gi < nx; ++gi) {
            const auto id = grid.nid(gi, gj);
            std::snprintf(line, sizeof(line), "%d %.17g %.17g %d\n", id, gi * grid.h, gj * grid.h,
                          id >= 0 ? 1 : 0);
            out += line;
        }
    return out;
}

} // namespace perihom
