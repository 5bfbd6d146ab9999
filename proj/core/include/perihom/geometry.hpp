#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace perihom {

// Axis-aligned reference hole T = [lo,hi]^d, strictly inside Y = [0,1)^d.
struct HoleBox {
    double lo = 0.0;
    double hi = 0.0;
};

// One edge of the discrete hole boundary ∂T inside the unit cell, with both
// node layouts attached: the full (m+1)^2 corner layout used by unfolded
// fields and the m^2 periodic layout used by cell problems.
struct MicroFacet {
    std::int32_t full_a = -1, full_b = -1; // endpoint ids, full layout
    std::int32_t per_a = -1, per_b = -1;   // endpoint ids, periodic layout
    std::array<double, 2> ya{};            // endpoint coordinates in Y
    std::array<double, 2> yb{};
};

// Discrete unit cell Y with an exactly grid-resolved hole. Immutable after
// build_cell_geometry; safe to share across threads.
struct CellGeometry {
    int dim = 2;
    std::optional<HoleBox> hole;
    int micro_resolution = 0; // m: micro cells per unit-cell edge

    // hole spans micro cells [hole_lo_cell, hole_hi_cell) on each axis
    int hole_lo_cell = 0;
    int hole_hi_cell = 0;

    double area_y_star = 1.0;    // |Y_*|
    double hole_perimeter = 0.0; // per(∂T)
    int n_material_cells = 0;

    // full corner layout: (m+1)^2 nodes, id -1 where the node touches no
    // material cell (strict hole interior)
    std::vector<std::int32_t> full_node_id;
    int n_full_nodes = 0;

    // periodic layout: m^2 base nodes, opposite faces of Y identified
    std::vector<std::int32_t> periodic_dof_id;
    int n_periodic_dofs = 0;

    std::vector<std::uint8_t> cell_material; // m^2 row-major
    std::vector<MicroFacet> pore_facets;     // discrete ∂T

    int m() const { return micro_resolution; }

    bool material(int a, int b) const {
        return cell_material[static_cast<std::size_t>(b) * micro_resolution + a] != 0;
    }
    // a, b in [0, m]
    std::int32_t full_id(int a, int b) const {
        return full_node_id[static_cast<std::size_t>(b) * (micro_resolution + 1) + a];
    }
    // wraps modulo m
    std::int32_t periodic_id(int a, int b) const {
        const int aw = ((a % micro_resolution) + micro_resolution) % micro_resolution;
        const int bw = ((b % micro_resolution) + micro_resolution) % micro_resolution;
        return periodic_dof_id[static_cast<std::size_t>(bw) * micro_resolution + aw];
    }
    std::int32_t full_to_periodic(int a, int b) const { return periodic_id(a, b); }

    std::array<double, 2> full_node_coord(int a, int b) const {
        const double hm = 1.0 / micro_resolution;
        return {a * hm, b * hm};
    }
};

CellGeometry build_cell_geometry(int dim, std::optional<HoleBox> hole, int micro_resolution);

// Structured grid of the perforated macroscopic domain Ω_ε. Spacing is ε/m so
// each ε-cell carries an exact copy of the Y_* micro grid.
struct PerforatedGrid {
    CellGeometry cell;
    double epsilon = 0.0;
    int n_per_unit = 0; // 1/ε
    std::array<int, 2> lengths{1, 1};

    int cells_x = 0, cells_y = 0; // fine cells per edge
    int macro_x = 0, macro_y = 0; // ε-cells per edge
    double h = 0.0;               // ε/m

    std::vector<std::int32_t> node_id; // (cells_x+1)*(cells_y+1), -1 inactive
    int n_nodes = 0;
    std::vector<std::array<std::int32_t, 2>> node_coord; // active id -> grid coords

    struct PoreFacet {
        std::int32_t na = -1, nb = -1;  // active node ids of the endpoints
        std::int32_t macro_cell = -1;   // flat ε-cell index
        std::int32_t micro_facet = -1;  // index into cell.pore_facets
    };
    std::vector<PoreFacet> pore_facets;
    std::vector<std::array<std::int32_t, 2>> exterior_facets; // on ∂Ω

    double measure_omega_eps = 0.0; // |Ω_ε|
    double measure_pores = 0.0;     // |T_ε|

    bool cell_material(int ci, int cj) const {
        return cell.material(ci % cell.micro_resolution, cj % cell.micro_resolution);
    }
    std::int32_t nid(int gi, int gj) const {
        return node_id[static_cast<std::size_t>(gj) * (cells_x + 1) + gi];
    }
    std::array<double, 2> node_xy(std::int32_t id) const {
        return {node_coord[id][0] * h, node_coord[id][1] * h};
    }
    std::size_t total_cells() const {
        return static_cast<std::size_t>(cells_x) * cells_y;
    }
    std::size_t cell_flat(int ci, int cj) const {
        return static_cast<std::size_t>(cj) * cells_x + ci;
    }
    // ε-cell (ξ1, ξ2) and micro offset of a fine cell
    std::array<int, 2> cell_to_macro(int ci, int cj) const {
        return {ci / cell.micro_resolution, cj / cell.micro_resolution};
    }
    std::size_t macro_flat(int mx, int my) const {
        return static_cast<std::size_t>(my) * macro_x + mx;
    }
};

PerforatedGrid build_perforated_grid(const CellGeometry& geom, double epsilon,
                                     std::array<int, 2> lengths);

// Row-major pairing of macro cells with the full micro node layout; the flat
// index of TwoScaleField values.
struct TwoScaleIndex {
    int macro_x = 0, macro_y = 0;
    double epsilon = 0.0;              // macro cell edge length
    const CellGeometry* cell = nullptr;
    int n_micro = 0;                   // cell->n_full_nodes

    std::size_t size() const {
        return static_cast<std::size_t>(macro_x) * macro_y * n_micro;
    }
    std::size_t at(int mx, int my, std::int32_t micro_id) const {
        return (static_cast<std::size_t>(my) * macro_x + mx) * n_micro + micro_id;
    }
};

TwoScaleIndex make_two_scale_index(const PerforatedGrid& grid);
TwoScaleIndex make_two_scale_index(int macro_x, int macro_y, double epsilon,
                                   const CellGeometry& cell);

// plain-text debug listing (node id, coordinates, active flag) for golden tests
std::string dump_grid(const PerforatedGrid& grid);

} // namespace perihom
