#include "perihom/cell_problem.hpp"

#include "perihom/errors.hpp"
#include "perihom/fem.hpp"
#include "perihom/kahan.hpp"
#include "perihom/operators.hpp"

#include <cmath>

namespace perihom {

namespace {

std::array<std::int32_t, 4> periodic_corners(const CellGeometry& g, int a, int b) {
    return {g.periodic_id(a, b), g.periodic_id(a + 1, b), g.periodic_id(a + 1, b + 1),
            g.periodic_id(a, b + 1)};
}

} // namespace

SparseMatrix assemble_micro_mass_periodic(const CellGeometry& geom) {
    const int m = geom.micro_resolution;
    const double h2 = 1.0 / (static_cast<double>(m) * m);
    const auto& ref = ElementMatrices::reference_mass();
    TripletAccumulator acc(geom.n_periodic_dofs);
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!geom.material(a, b))
                continue;
            const auto c = periodic_corners(geom, a, b);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc.add(c[i], c[j], h2 * ref[i][j]);
        }
    return acc.compress();
}

SparseMatrix assemble_micro_stiffness_periodic(const CellGeometry& geom,
                                               const CoefficientField& coeff) {
    const int m = geom.micro_resolution;
    TripletAccumulator acc(geom.n_periodic_dofs);
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!geom.material(a, b))
                continue;
            const auto ke = ElementMatrices::stiffness(coeff.at_micro_cell(a, b));
            const auto c = periodic_corners(geom, a, b);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    acc.add(c[i], c[j], ke[i][j]);
        }
    return acc.compress();
}

SparseMatrix assemble_micro_robin_periodic(const CellGeometry& geom, double coefficient) {
    // facet-lumped, matching the macroscopic Robin convention
    const int m = geom.micro_resolution;
    const double w = 0.5 * coefficient / m;
    TripletAccumulator acc(geom.n_periodic_dofs);
    for (const auto& f : geom.pore_facets) {
        acc.add(f.per_a, f.per_a, w);
        acc.add(f.per_b, f.per_b, w);
    }
    return acc.compress();
}

std::vector<double> micro_lumped_mass_periodic(const CellGeometry& geom) {
    const int m = geom.micro_resolution;
    std::vector<double> vol(static_cast<std::size_t>(geom.n_periodic_dofs), 0.0);
    const double w = 0.25 / (static_cast<double>(m) * m);
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!geom.material(a, b))
                continue;
            for (auto c : periodic_corners(geom, a, b))
                vol[c] += w;
        }
    return vol;
}

EffectiveTensor solve_cell_problems(const CellGeometry& geom, const CoefficientField& D,
                                    const SolveOptions& opts) {
    const int m = geom.micro_resolution;
    const double hm = 1.0 / m;
    const auto K = assemble_micro_stiffness_periodic(geom, D);
    const auto M = assemble_micro_mass_periodic(geom);
    const auto gint = ElementMatrices::gradient_integrals();

    EffectiveTensor out;
    out.area_y_star = geom.area_y_star;
    out.hole_perimeter = geom.hole_perimeter;

    SolveOptions cell_opts = opts;
    cell_opts.deflate_constants = true;

    std::vector<double> ones(static_cast<std::size_t>(geom.n_periodic_dofs), 1.0);
    const double total_mass = M.quadratic_form(ones);

    for (int j = 0; j < 2; ++j) {
        std::vector<double> rhs(static_cast<std::size_t>(geom.n_periodic_dofs), 0.0);
        for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a) {
                if (!geom.material(a, b))
                    continue;
                const auto d = D.at_micro_cell(a, b);
                const auto de = j == 0 ? d.apply(1.0, 0.0) : d.apply(0.0, 1.0);
                const auto c = periodic_corners(geom, a, b);
                for (int i = 0; i < 4; ++i)
                    rhs[c[i]] -= hm * (de[0] * gint[i][0] + de[1] * gint[i][1]);
            }
        SolveStats stats;
        out.corrector_per[j] = solve_spd(K, rhs, cell_opts, &stats);
        out.cell_residuals[j] = stats.relative_residual;

        // mass-weighted mean zero
        const double mean = M.bilinear_form(ones, out.corrector_per[j]) / total_mass;
        for (auto& v : out.corrector_per[j])
            v -= mean;
        out.corrector_full[j] = expand_periodic_slice(geom, out.corrector_per[j]);
    }

    // energy form d_eff[i][j] = ∫ D(∇Φ_j + e_j)·(∇Φ_i + e_i), exact per element
    double dm[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            KahanSum acc;
            const std::array<double, 2> ei = i == 0 ? std::array<double, 2>{1.0, 0.0}
                                                    : std::array<double, 2>{0.0, 1.0};
            const std::array<double, 2> ej = j == 0 ? std::array<double, 2>{1.0, 0.0}
                                                    : std::array<double, 2>{0.0, 1.0};
            for (int b = 0; b < m; ++b)
                for (int a = 0; a < m; ++a) {
                    if (!geom.material(a, b))
                        continue;
                    const auto d = D.at_micro_cell(a, b);
                    const auto ke = ElementMatrices::stiffness(d);
                    const auto c = periodic_corners(geom, a, b);
                    double vi[4], vj[4];
                    for (int k = 0; k < 4; ++k) {
                        vi[k] = out.corrector_per[i][c[k]];
                        vj[k] = out.corrector_per[j][c[k]];
                    }
                    double term = 0.0;
                    for (int p = 0; p < 4; ++p)
                        for (int q = 0; q < 4; ++q)
                            term += vi[p] * ke[p][q] * vj[q];
                    // ∫ ∇Φ over the element, exact for Q1
                    double gpi[2] = {0.0, 0.0}, gpj[2] = {0.0, 0.0};
                    for (int p = 0; p < 4; ++p) {
                        gpi[0] += hm * vi[p] * gint[p][0];
                        gpi[1] += hm * vi[p] * gint[p][1];
                        gpj[0] += hm * vj[p] * gint[p][0];
                        gpj[1] += hm * vj[p] * gint[p][1];
                    }
                    const auto dej = d.apply(ej[0], ej[1]);
                    const auto dei = d.apply(ei[0], ei[1]);
                    term += dej[0] * gpi[0] + dej[1] * gpi[1];
                    term += dei[0] * gpj[0] + dei[1] * gpj[1];
                    term += hm * hm * (ei[0] * dej[0] + ei[1] * dej[1]);
                    acc.add(term);
                }
            dm[i][j] = acc.value();
            dm[j][i] = dm[i][j];
        }

    // off-diagonal consistency: recompute d[1][0] from the transposed pairing
    {
        KahanSum acc;
        for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a) {
                if (!geom.material(a, b))
                    continue;
                const auto d = D.at_micro_cell(a, b);
                const auto ke = ElementMatrices::stiffness(d);
                const auto c = periodic_corners(geom, a, b);
                double v0[4], v1[4];
                for (int k = 0; k < 4; ++k) {
                    v0[k] = out.corrector_per[0][c[k]];
                    v1[k] = out.corrector_per[1][c[k]];
                }
                double term = 0.0;
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q)
                        term += v1[p] * ke[p][q] * v0[q];
                double gp0[2] = {0.0, 0.0}, gp1[2] = {0.0, 0.0};
                for (int p = 0; p < 4; ++p) {
                    gp0[0] += hm * v0[p] * gint[p][0];
                    gp0[1] += hm * v0[p] * gint[p][1];
                    gp1[0] += hm * v1[p] * gint[p][0];
                    gp1[1] += hm * v1[p] * gint[p][1];
                }
                const auto de0 = d.apply(1.0, 0.0);
                const auto de1 = d.apply(0.0, 1.0);
                term += de0[0] * gp1[0] + de0[1] * gp1[1];
                term += de1[0] * gp0[0] + de1[1] * gp0[1];
                term += hm * hm * de0[1];
                acc.add(term);
            }
        const double d10 = acc.value();
        if (std::abs(d10 - dm[0][1]) > 1e-10 * (1.0 + std::abs(dm[0][1])))
            throw AssemblyError("effective tensor asymmetry beyond tolerance: " +
                                std::to_string(std::abs(d10 - dm[0][1])));
        dm[0][1] = dm[1][0] = 0.5 * (dm[0][1] + d10);
    }

    out.d_eff = Sym2{dm[0][0], dm[0][1], dm[1][1]};
    const auto ev = out.d_eff.eigenvalues();
    if (!(ev[0] > 0.0))
        throw AssemblyError("effective tensor is not positive definite");
    return out;
}

Sym2 voigt_bound(const CellGeometry& geom, const CoefficientField& D) {
    const int m = geom.micro_resolution;
    const double w = 1.0 / (static_cast<double>(m) * m);
    KahanSum a11, a12, a22;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!geom.material(a, b))
                continue;
            const auto& d = D.at_micro_cell(a, b);
            a11.add(w * d.a11);
            a12.add(w * d.a12);
            a22.add(w * d.a22);
        }
    return Sym2{a11.value(), a12.value(), a22.value()};
}

RecoveredGradient recovered_gradient(const ScalarField& u) {
    const auto& grid = *u.grid;
    if (grid.cell.hole)
        throw ParameterError("gradient recovery expects a hole-free macro grid");
    const int nx = grid.cells_x + 1, ny = grid.cells_y + 1;
    RecoveredGradient g;
    g.gx.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    g.gy.assign(g.gx.size(), 0.0);
    const double inv_h = 1.0 / grid.h;
    auto val = [&](int gi, int gj) { return u.values[grid.nid(gi, gj)]; };
    for (int gj = 0; gj < ny; ++gj)
        for (int gi = 0; gi < nx; ++gi) {
            double dx, dy;
            if (gi == 0)
                dx = (val(1, gj) - val(0, gj)) * inv_h;
            else if (gi == nx - 1)
                dx = (val(nx - 1, gj) - val(nx - 2, gj)) * inv_h;
            else
                dx = (val(gi + 1, gj) - val(gi - 1, gj)) * 0.5 * inv_h;
            if (gj == 0)
                dy = (val(gi, 1) - val(gi, 0)) * inv_h;
            else if (gj == ny - 1)
                dy = (val(gi, ny - 1) - val(gi, ny - 2)) * inv_h;
            else
                dy = (val(gi, gj + 1) - val(gi, gj - 1)) * 0.5 * inv_h;
            const std::size_t k = static_cast<std::size_t>(gj) * nx + gi;
            g.gx[k] = dx;
            g.gy[k] = dy;
        }
    return g;
}

TwoScaleField evaluate_corrector(const ScalarField& u, const EffectiveTensor& tensor,
                                 const TwoScaleIndex& idx) {
    const auto& grid = *u.grid;
    if (grid.cells_x != idx.macro_x || grid.cells_y != idx.macro_y)
        throw PairingError("corrector evaluation expects one macro cell per grid cell");
    const auto g = recovered_gradient(u);
    const int nx = grid.cells_x + 1;
    TwoScaleField U(idx, u.time);
    for (int my = 0; my < idx.macro_y; ++my)
        for (int mx = 0; mx < idx.macro_x; ++mx) {
            const std::size_t n00 = static_cast<std::size_t>(my) * nx + mx;
            const double gx = 0.25 * (g.gx[n00] + g.gx[n00 + 1] + g.gx[n00 + nx] +
                                      g.gx[n00 + nx + 1]);
            const double gy = 0.25 * (g.gy[n00] + g.gy[n00 + 1] + g.gy[n00 + nx] +
                                      g.gy[n00 + nx + 1]);
            const std::size_t off = idx.at(mx, my, 0);
            for (std::int32_t k = 0; k < idx.n_micro; ++k)
                U.values[off + k] =
                    gx * tensor.corrector_full[0][k] + gy * tensor.corrector_full[1][k];
        }
    return U;
}

double boundary_average(const CellGeometry& geom,
                        const std::function<double(double, double)>& v_of_y) {
    if (geom.pore_facets.empty())
        throw GeometryError("boundary average needs a non-empty pore boundary");
    const double len = 1.0 / geom.micro_resolution;
    KahanSum acc;
    for (const auto& f : geom.pore_facets)
        acc.add(len * 0.5 * (v_of_y(f.ya[0], f.ya[1]) + v_of_y(f.yb[0], f.yb[1])));
    return acc.value() / geom.hole_perimeter;
}

} // namespace perihom
