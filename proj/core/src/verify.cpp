#include "perihom/verify.hpp"

#include "perihom/errors.hpp"
#include "perihom/kahan.hpp"
#include "perihom/mollifier.hpp"
#include "perihom/operators.hpp"
#include "perihom/presets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace perihom {

namespace {
constexpr double kPi = 3.14159265358979323846;

// smooth probe fields for the auxiliary rate checks
double probe_two_scale(double x1, double x2, double y1, double) {
    return (1.0 + x1 * x2) * (1.0 + 0.5 * std::cos(2.0 * kPi * y1));
}
double probe_macro(double x1, double x2) { return std::cos(kPi * x1) * std::cos(kPi * x2); }

} // namespace

TrajectoryComparator::TrajectoryComparator(const PerforatedGrid& micro_grid,
                                           const PerforatedGrid& macro_grid,
                                           const EffectiveTensor& tensor)
    : micro_grid_(&micro_grid), macro_grid_(&macro_grid), tensor_(&tensor),
      idx_(make_two_scale_index(micro_grid)) {
    if (macro_grid.cells_x % micro_grid.macro_x != 0 ||
        macro_grid.cells_y % micro_grid.macro_y != 0)
        throw PairingError("limit grid cells do not tile the ε-cells");
    ratio_ = macro_grid.cells_x / micro_grid.macro_x;
    if (macro_grid.cells_y / micro_grid.macro_y != ratio_)
        throw PairingError("anisotropic pairing ratio");

    const auto& g = micro_grid.cell;
    const int m = g.micro_resolution;
    const double inv2h = 0.5 * m;
    for (int j = 0; j < 2; ++j) {
        phi_gx_[j].assign(static_cast<std::size_t>(m) * m, 0.0);
        phi_gy_[j].assign(phi_gx_[j].size(), 0.0);
        const auto& phi = tensor.corrector_full[j];
        for (int b = 0; b < m; ++b)
            for (int a = 0; a < m; ++a) {
                if (!g.material(a, b))
                    continue;
                const double v0 = phi[g.full_id(a, b)];
                const double v1 = phi[g.full_id(a + 1, b)];
                const double v2 = phi[g.full_id(a + 1, b + 1)];
                const double v3 = phi[g.full_id(a, b + 1)];
                const std::size_t k = static_cast<std::size_t>(b) * m + a;
                phi_gx_[j][k] = (v1 + v2 - v0 - v3) * inv2h;
                phi_gy_[j][k] = (v3 + v2 - v0 - v1) * inv2h;
            }
    }
}

TrajectoryComparator::SnapshotTerms
TrajectoryComparator::compare(const ScalarField& u_eps, const ScalarField& theta_eps,
                              const ScalarField& u_lim,
                              std::span<const double> theta_lim) const {
    const auto& mg = *micro_grid_;
    const auto& lg = *macro_grid_;
    const auto& g = mg.cell;
    const int m = g.micro_resolution;
    const int r = ratio_;
    const double H = lg.h;
    const double H2 = H * H;
    const double cell_measure = 1.0 / (static_cast<double>(m) * m);

    const auto tu = unfold(u_eps, idx_);
    const auto tt = unfold(theta_eps, idx_);
    const auto tgu = unfold_gradient(u_eps, idx_);
    const auto tgt = grad_y(tt); // = T(ε ∇θ_ε) exactly
    const auto rec = recovered_gradient(u_lim);
    const int lnx = lg.cells_x + 1;
    const int nper = g.n_periodic_dofs;

    KahanSum su, sgu, st, sgt;
    std::vector<double> diff(static_cast<std::size_t>(g.n_full_nodes));
    std::vector<double> theta_full;

    for (int my = 0; my < mg.macro_y; ++my)
        for (int mx = 0; mx < mg.macro_x; ++mx) {
            const std::size_t off = idx_.at(mx, my, 0);
            const double* u_slice = tu.values.data() + off;
            const double* t_slice = tt.values.data() + off;
            for (int sj = 0; sj < r; ++sj)
                for (int si = 0; si < r; ++si) {
                    const int li = mx * r + si, lj = my * r + sj;
                    // limit u at the cell center and its recovered gradient
                    const std::int32_t c0 = lg.nid(li, lj), c1 = lg.nid(li + 1, lj),
                                       c2 = lg.nid(li + 1, lj + 1), c3 = lg.nid(li, lj + 1);
                    const double u_c = 0.25 * (u_lim.values[c0] + u_lim.values[c1] +
                                               u_lim.values[c2] + u_lim.values[c3]);
                    const std::size_t n00 = static_cast<std::size_t>(lj) * lnx + li;
                    const double gsx = 0.25 * (rec.gx[n00] + rec.gx[n00 + 1] +
                                               rec.gx[n00 + lnx] + rec.gx[n00 + lnx + 1]);
                    const double gsy = 0.25 * (rec.gy[n00] + rec.gy[n00 + 1] +
                                               rec.gy[n00 + lnx] + rec.gy[n00 + lnx + 1]);

                    for (std::int32_t k = 0; k < idx_.n_micro; ++k)
                        diff[k] = u_slice[k] - u_c;
                    su.add(H2 * micro_l2sq(g, diff));

                    const std::size_t tbase =
                        (static_cast<std::size_t>(lj) * lg.cells_x + li) * nper;
                    theta_full = expand_periodic_slice(
                        g, std::span(theta_lim.data() + tbase, static_cast<std::size_t>(nper)));
                    for (std::int32_t k = 0; k < idx_.n_micro; ++k)
                        diff[k] = t_slice[k] - theta_full[k];
                    st.add(H2 * micro_l2sq(g, diff));

                    // gradient terms per micro cell
                    const double inv2h = 0.5 * m;
                    KahanSum eu, et;
                    for (int b = 0; b < m; ++b)
                        for (int a = 0; a < m; ++a) {
                            if (!g.material(a, b))
                                continue;
                            const std::size_t mc = static_cast<std::size_t>(b) * m + a;
                            const std::size_t tk = tgu.at(mx, my, a, b);
                            const double want_x = gsx + gsx * phi_gx_[0][mc] +
                                                  gsy * phi_gx_[1][mc];
                            const double want_y = gsy + gsx * phi_gy_[0][mc] +
                                                  gsy * phi_gy_[1][mc];
                            const double dx = tgu.vx[tk] - want_x;
                            const double dy = tgu.vy[tk] - want_y;
                            eu.add(dx * dx + dy * dy);

                            const double v0 = theta_full[g.full_id(a, b)];
                            const double v1 = theta_full[g.full_id(a + 1, b)];
                            const double v2 = theta_full[g.full_id(a + 1, b + 1)];
                            const double v3 = theta_full[g.full_id(a, b + 1)];
                            const double tx = tgt.vx[tk] - (v1 + v2 - v0 - v3) * inv2h;
                            const double ty = tgt.vy[tk] - (v3 + v2 - v0 - v1) * inv2h;
                            et.add(tx * tx + ty * ty);
                        }
                    sgu.add(H2 * cell_measure * eu.value());
                    sgt.add(H2 * cell_measure * et.value());
                }
        }

    SnapshotTerms terms;
    terms.u_l2 = std::sqrt(std::max(0.0, su.value()));
    terms.grad_u = std::sqrt(std::max(0.0, sgu.value()));
    terms.theta_l2 = std::sqrt(std::max(0.0, st.value()));
    terms.grad_theta = std::sqrt(std::max(0.0, sgt.value()));
    return terms;
}

double TrajectoryComparator::initial_gap(const ScalarField& u0_eps,
                                         const ScalarField& theta0_eps,
                                         const ScalarField& u0_lim,
                                         std::span<const double> theta0_lim) const {
    const auto t = compare(u0_eps, theta0_eps, u0_lim, theta0_lim);
    return t.u_l2 + t.theta_l2;
}

ErrorFunctional error_functional(const MicroTrajectory& micro, const LimitTrajectory& limit,
                                 const TrajectoryComparator& cmp) {
    const std::size_t K = micro.snapshot_times.size();
    if (K < 2 || limit.snapshot_times.size() != K)
        throw PairingError("snapshot cadences of the paired runs differ");
    for (std::size_t k = 0; k < K; ++k)
        if (std::abs(micro.snapshot_times[k] - limit.snapshot_times[k]) > 1e-12)
            throw PairingError("snapshot times of the paired runs differ");

    ErrorFunctional e;
    KahanSum e2sq, e4sq;
    for (std::size_t k = 0; k < K; ++k) {
        const auto terms = cmp.compare(micro.u[k], micro.theta[k], limit.u[k], limit.theta[k]);
        e.e1 = std::max(e.e1, terms.u_l2);
        e.e3 = std::max(e.e3, terms.theta_l2);
        if (k + 1 < K) {
            const double dt = micro.snapshot_times[k + 1] - micro.snapshot_times[k];
            e2sq.add(dt * terms.grad_u * terms.grad_u);
            e4sq.add(dt * terms.grad_theta * terms.grad_theta);
        }
    }
    e.e2 = std::sqrt(std::max(0.0, e2sq.value()));
    e.e4 = std::sqrt(std::max(0.0, e4sq.value()));
    return e;
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
    RateFit fit;
    std::vector<std::pair<double, double>> logs;
    for (const auto& [eps, err] : points) {
        if (!(err > 0.0)) {
            fit.notes.push_back("dropped epsilon = " + std::to_string(eps) +
                                " with non-positive error");
            continue;
        }
        logs.emplace_back(std::log(eps), std::log(err));
    }
    if (logs.size() < 3)
        throw FitError("rate fit needs at least 3 positive points, got " +
                       std::to_string(logs.size()));
    double mx = 0, my = 0;
    for (const auto& [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(logs.size());
    my /= static_cast<double>(logs.size());
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : logs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    fit.slope = sxy / sxx;
    const double b = my - fit.slope * mx;
    fit.intercept = std::exp(b);
    double ss = 0;
    for (const auto& [x, y] : logs) {
        const double r = y - (b + fit.slope * x);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(logs.size()));
    fit.points_used = static_cast<int>(logs.size());
    return fit;
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double max_abs(std::span<const double> a) {
    double worst = 0.0;
    for (double v : a)
        worst = std::max(worst, std::abs(v));
    return worst;
}

} // namespace

std::vector<ExactnessCheck> ops_exactness_suite(const CellGeometry& geom,
                                                std::span<const int> inv_epsilons,
                                                std::uint64_t seed) {
    std::vector<ExactnessCheck> checks;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.1, 1.1);
    const auto reaction = reaction_preset("smoluchowski");
    const double tol = 1e-12;

    auto push = [&](const std::string& name, double err, double tolerance) {
        checks.push_back({name, err, tolerance, err <= tolerance});
    };

    for (int inv : inv_epsilons) {
        const double eps = 1.0 / inv;
        const std::string tag = " [eps=1/" + std::to_string(inv) + "]";
        const auto grid = build_perforated_grid(geom, eps, {1, 1});
        const auto idx = make_two_scale_index(grid);

        ScalarField u(grid), v(grid);
        for (auto& x : u.values)
            x = dist(rng);
        for (auto& x : v.values)
            x = dist(rng);

        const auto tu = unfold(u, idx);
        const auto tv = unfold(v, idx);

        // volume norm preservation
        {
            const double lhs = ts_l2_norm(tu);
            const double rhs = l2_norm(u);
            push("norm preservation ‖Tu‖ = ‖u‖" + tag, std::abs(lhs - rhs) / rhs, tol);
        }
        // volume integration formula
        {
            const double lhs = ts_integral(tu);
            const double rhs = integral(u);
            push("integration formula ∫∫Tu = ∫u" + tag, std::abs(lhs - rhs) / std::abs(rhs),
                 tol);
        }
        // product rule in the volume
        {
            ScalarField uv(grid);
            for (std::size_t i = 0; i < uv.values.size(); ++i)
                uv.values[i] = u.values[i] * v.values[i];
            const auto tuv = unfold(uv, idx);
            std::vector<double> prod(tu.values.size());
            for (std::size_t i = 0; i < prod.size(); ++i)
                prod[i] = tu.values[i] * tv.values[i];
            push("product rule T(uv) = Tu·Tv" + tag,
                 max_abs_diff(tuv.values, prod) / std::max(1e-300, max_abs(prod)), tol);
        }
        // gradient commutation T(ε∇u) = ∇_y(Tu)
        {
            auto tg = unfold_gradient(u, idx);
            for (auto& x : tg.vx)
                x *= eps;
            for (auto& x : tg.vy)
                x *= eps;
            const auto gy = grad_y(tu);
            const double scale = std::max({max_abs(gy.vx), max_abs(gy.vy), 1e-300});
            const double err =
                std::max(max_abs_diff(tg.vx, gy.vx), max_abs_diff(tg.vy, gy.vy)) / scale;
            push("commutation T(ε∇u) = ∇_y(Tu)" + tag, err, tol);
        }
        // nonlinearity commutation T[R(u)] = R(Tu)
        {
            ScalarField ru(grid);
            for (std::size_t i = 0; i < ru.values.size(); ++i)
                ru.values[i] = reaction(u.values[i]);
            const auto tru = unfold(ru, idx);
            std::vector<double> rtu(tu.values.size());
            for (std::size_t i = 0; i < rtu.size(); ++i)
                rtu[i] = reaction(tu.values[i]);
            push("reaction commutation T[R(u)] = R(Tu)" + tag,
                 max_abs_diff(tru.values, rtu) / std::max(1e-300, max_abs(rtu)), tol);
        }
        if (!grid.pore_facets.empty()) {
            const auto tr_u = trace_on_pores(u);
            const auto tr_v = trace_on_pores(v);
            const auto tbu = unfold_boundary(tr_u);
            const auto tbv = unfold_boundary(tr_v);
            // boundary norm preservation ‖T^b u‖ = √ε ‖u‖
            {
                const double lhs = ts_boundary_l2_norm(tbu);
                const double rhs = std::sqrt(eps) * boundary_l2_norm(tr_u);
                push("boundary norm ‖T^b u‖ = √ε ‖u‖" + tag, std::abs(lhs - rhs) / rhs, tol);
            }
            // boundary integration formula
            {
                const double lhs = ts_boundary_integral(tbu);
                const double rhs = eps * boundary_integral(tr_u);
                push("integration formula ε∫u = ∫∫T^b u" + tag,
                     std::abs(lhs - rhs) / std::abs(rhs), tol);
            }
            // boundary product rule
            {
                BoundaryTrace uv(grid);
                for (std::size_t k = 0; k < uv.end_values.size(); ++k)
                    uv.end_values[k] = {tr_u.end_values[k][0] * tr_v.end_values[k][0],
                                        tr_u.end_values[k][1] * tr_v.end_values[k][1]};
                const auto tbuv = unfold_boundary(uv);
                double worst = 0.0, scale = 1e-300;
                for (std::size_t k = 0; k < tbuv.end_values.size(); ++k)
                    for (int i = 0; i < 2; ++i) {
                        const double want = tbu.end_values[k][i] * tbv.end_values[k][i];
                        worst = std::max(worst, std::abs(tbuv.end_values[k][i] - want));
                        scale = std::max(scale, std::abs(want));
                    }
                push("boundary product rule T^b(uv) = T^b u·T^b v" + tag, worst / scale, tol);
            }
        }
        // ε-norm identity
        {
            const double lhs = ts_h1y_norm_sum(tu);
            const double rhs = eps_norm(u);
            push("ε-norm identity ‖Tu‖ = ‖u‖_ε" + tag, std::abs(lhs - rhs) / rhs, tol);
        }
    }
    return checks;
}

AuxiliaryRates auxiliary_rates(const CellGeometry& geom, std::span<const int> inv_epsilons,
                               double delta) {
    AuxiliaryRates out;
    const int m = geom.micro_resolution;

    for (int inv : inv_epsilons) {
        const double eps = 1.0 / inv;
        out.epsilons.push_back(eps);
        const auto grid = build_perforated_grid(geom, eps, {1, 1});
        const auto idx = make_two_scale_index(grid);
        const double h = grid.h;

        const auto U = sample_two_scale(idx, probe_two_scale);
        const auto folded = fold(U, grid);
        const auto tfu = unfold(folded, idx);

        std::vector<double> diff(static_cast<std::size_t>(geom.n_full_nodes));
        const double h2 = h * h;

        // fold-then-unfold error: ‖T F U − U‖ with x resolved per fine subcell
        {
            KahanSum acc;
            for (int my = 0; my < grid.macro_y; ++my)
                for (int mx = 0; mx < grid.macro_x; ++mx) {
                    const std::size_t off = idx.at(mx, my, 0);
                    const double* slice = tfu.values.data() + off;
                    for (int sj = 0; sj < m; ++sj)
                        for (int si = 0; si < m; ++si) {
                            const double cx = (mx * m + si + 0.5) * h;
                            const double cy = (my * m + sj + 0.5) * h;
                            for (int b = 0; b <= m; ++b)
                                for (int a = 0; a <= m; ++a) {
                                    const auto fid = geom.full_id(a, b);
                                    if (fid < 0)
                                        continue;
                                    diff[fid] = slice[fid] -
                                                probe_two_scale(cx, cy,
                                                                static_cast<double>(a) / m,
                                                                static_cast<double>(b) / m);
                                }
                            acc.add(h2 * micro_l2sq(geom, diff));
                        }
                }
            out.refold_error.push_back(std::sqrt(std::max(0.0, acc.value())));
        }

        // unfolding error: ‖T u − u‖ for u ∈ H¹(Ω)
        {
            const auto u = sample_nodal(grid, probe_macro);
            const auto tu = unfold(u, idx);
            KahanSum acc;
            for (int my = 0; my < grid.macro_y; ++my)
                for (int mx = 0; mx < grid.macro_x; ++mx) {
                    const std::size_t off = idx.at(mx, my, 0);
                    const double* slice = tu.values.data() + off;
                    for (int sj = 0; sj < m; ++sj)
                        for (int si = 0; si < m; ++si) {
                            const double uc = probe_macro((mx * m + si + 0.5) * h,
                                                          (my * m + sj + 0.5) * h);
                            for (std::int32_t k = 0; k < idx.n_micro; ++k)
                                diff[k] = slice[k] - uc;
                            acc.add(h2 * micro_l2sq(geom, diff));
                        }
                }
            out.unfold_error.push_back(std::sqrt(std::max(0.0, acc.value())));
        }

        // folding mismatch of the gradient folding operator
        {
            const auto gu = gradient_fold(U, grid);
            ScalarField d0 = gu;
            for (std::size_t i = 0; i < d0.values.size(); ++i)
                d0.values[i] -= folded.values[i];
            auto gg = discrete_gradient(gu);
            const auto fgy = fold_cells(grad_y(U), grid);
            for (std::size_t i = 0; i < gg.vx.size(); ++i) {
                gg.vx[i] = eps * gg.vx[i] - fgy.vx[i];
                gg.vy[i] = eps * gg.vy[i] - fgy.vy[i];
            }
            out.folding_mismatch.push_back(l2_norm(d0) + l2_norm(gg));
        }

        // mollifier commutation: sup of T(∇^δ u) − ∇^δ u over Ω × Y_*
        {
            const auto u = sample_nodal(grid, default_u0);
            const auto moll = make_mollifier(delta, h);
            const auto gd = mollified_gradient(u, moll);
            double sup = 0.0;
            for (int my = 0; my < grid.macro_y; ++my)
                for (int mx = 0; mx < grid.macro_x; ++mx) {
                    double max_mat[2] = {-1e300, -1e300}, min_mat[2] = {1e300, 1e300};
                    double max_all[2] = {-1e300, -1e300}, min_all[2] = {1e300, 1e300};
                    for (int b = 0; b <= m; ++b)
                        for (int a = 0; a <= m; ++a) {
                            const auto k = gd.at(mx * m + a, my * m + b);
                            const double val[2] = {gd.vx[k], gd.vy[k]};
                            const bool material_node = geom.full_id(a, b) >= 0;
                            for (int c = 0; c < 2; ++c) {
                                max_all[c] = std::max(max_all[c], val[c]);
                                min_all[c] = std::min(min_all[c], val[c]);
                                if (material_node) {
                                    max_mat[c] = std::max(max_mat[c], val[c]);
                                    min_mat[c] = std::min(min_mat[c], val[c]);
                                }
                            }
                        }
                    for (int c = 0; c < 2; ++c)
                        sup = std::max({sup, max_mat[c] - min_all[c], max_all[c] - min_mat[c]});
                }
            out.mollifier_commutation.push_back(sup);
        }
    }

    auto make_points = [&](const std::vector<double>& errs) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < errs.size(); ++i)
            pts.emplace_back(out.epsilons[i], errs[i]);
        return pts;
    };
    if (out.epsilons.size() >= 3) {
        auto p1 = make_points(out.refold_error);
        out.fit_refold = fit_rate(p1);
        auto p2 = make_points(out.unfold_error);
        out.fit_unfold = fit_rate(p2);
        auto p3 = make_points(out.folding_mismatch);
        out.fit_mismatch = fit_rate(p3);
        auto p4 = make_points(out.mollifier_commutation);
        out.fit_mollifier = fit_rate(p4);
    }
    return out;
}

} // namespace perihom
