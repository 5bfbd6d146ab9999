#include "perihom/mollifier.hpp"

#include "perihom/errors.hpp"
#include "perihom/fem.hpp"
#include "perihom/kahan.hpp"

#include <cmath>

namespace perihom {

namespace {

// unnormalized bump; the constant C cancels in the renormalization
double bump(double r2, double delta2) {
    if (r2 >= delta2)
        return 0.0;
    return std::exp(1.0 / (r2 - delta2));
}

void fill_cell_values(const PerforatedGrid& grid, const ScalarField& u,
                      std::vector<double>& cells) {
    cells.assign(grid.total_cells(), 0.0);
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto c = cell_corners(grid, ci, cj);
            cells[grid.cell_flat(ci, cj)] =
                0.25 * (u.values[c[0]] + u.values[c[1]] + u.values[c[2]] + u.values[c[3]]);
        }
}

} // namespace

Mollifier make_mollifier(double delta, double h) {
    if (!(delta > 0.0) || !(h > 0.0))
        throw ParameterError("mollifier needs positive delta and grid spacing");
    if (delta < 2.0 * h)
        throw ParameterError("mollifier radius is below two grid cells; kernel unresolved");

    Mollifier m;
    m.delta = delta;
    m.h = h;
    const double rho = delta / h;
    m.radius = static_cast<int>(std::ceil(rho + 0.5));
    const int side = m.side();
    m.jw.assign(static_cast<std::size_t>(side) * side, 0.0);
    m.gwx.assign(m.jw.size(), 0.0);
    m.gwy.assign(m.jw.size(), 0.0);

    const double delta2 = delta * delta;
    const double h2 = h * h;
    KahanSum z;
    for (int dj = -m.radius; dj <= m.radius + 1; ++dj)
        for (int di = -m.radius; di <= m.radius + 1; ++di) {
            const double ox = (di - 0.5) * h;
            const double oy = (dj - 0.5) * h;
            const double r2 = ox * ox + oy * oy;
            const double j = bump(r2, delta2);
            if (j == 0.0)
                continue;
            const std::size_t k = m.at(di, dj);
            m.jw[k] = j * h2;
            const double denom = r2 - delta2;
            const double gfac = -2.0 * j / (denom * denom);
            m.gwx[k] = gfac * ox * h2;
            m.gwy[k] = gfac * oy * h2;
            z.add(m.jw[k]);
        }
    const double zz = z.value();
    if (!(zz > 0.0))
        throw ParameterError("mollifier kernel vanished after sampling");
    for (std::size_t k = 0; k < m.jw.size(); ++k) {
        m.jw[k] /= zz;
        m.gwx[k] /= zz;
        m.gwy[k] /= zz;
    }
    KahanSum s;
    for (double w : m.jw)
        s.add(w);
    m.weight_sum = s.value();
    return m;
}

MollifierCheck check_mollifier(double delta, double epsilon, const CellGeometry& geom) {
    MollifierCheck c;
    double diam_hole = 0.0;
    if (geom.hole)
        diam_hole = (geom.hole->hi - geom.hole->lo) * std::sqrt(2.0);
    const double diam_y = std::sqrt(2.0);
    c.admissible = delta > 2.0 * epsilon * diam_hole;
    c.strict_bound_ok = delta > 2.0 * epsilon * diam_y;
    if (!c.admissible)
        c.message = "delta = " + std::to_string(delta) + " <= 2 * " + std::to_string(epsilon) +
                    " * diam(T); the standing assumption delta > 2 eps diam(Y) fails already "
                    "at the hole scale";
    else if (!c.strict_bound_ok)
        c.message = "delta = " + std::to_string(delta) +
                    " does not satisfy delta > 2 eps diam(Y) = " +
                    std::to_string(2.0 * epsilon * diam_y) + " at eps = " +
                    std::to_string(epsilon) + "; rate checks remain meaningful, recorded only";
    return c;
}

void require_mollifier(double delta, double epsilon, const CellGeometry& geom) {
    const auto c = check_mollifier(delta, epsilon, geom);
    if (!c.admissible)
        throw ParameterError(c.message);
}

FullNodeVectorField mollified_gradient(const ScalarField& u, const Mollifier& moll) {
    const auto& grid = *u.grid;
    if (std::abs(moll.h - grid.h) > 1e-14 * grid.h)
        throw ParameterError("mollifier was sampled on a different grid spacing");

    std::vector<double> cells;
    fill_cell_values(grid, u, cells);

    FullNodeVectorField out(grid);
    const int R = moll.radius;
    const int side = moll.side();
    for (int gj = 0; gj <= grid.cells_y; ++gj)
        for (int gi = 0; gi <= grid.cells_x; ++gi) {
            double ax = 0.0, ay = 0.0;
            for (int dj = -R; dj <= R + 1; ++dj) {
                const int cj = gj - dj;
                if (cj < 0 || cj >= grid.cells_y)
                    continue;
                const std::size_t krow = static_cast<std::size_t>(dj + R) * side;
                const std::size_t crow = static_cast<std::size_t>(cj) * grid.cells_x;
                const int di_hi = std::min(R + 1, gi);
                const int di_lo = std::max(-R, gi - grid.cells_x + 1);
                for (int di = di_lo; di <= di_hi; ++di) {
                    const double v = cells[crow + (gi - di)];
                    if (v == 0.0)
                        continue;
                    ax += moll.gwx[krow + (di + R)] * v;
                    ay += moll.gwy[krow + (di + R)] * v;
                }
            }
            const auto k = out.at(gi, gj);
            out.vx[k] = ax;
            out.vy[k] = ay;
        }
    return out;
}

double max_abs(const FullNodeVectorField& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.vx.size(); ++k)
        m = std::max(m, std::hypot(f.vx[k], f.vy[k]));
    return m;
}

MollifiedGradientEvaluator::MollifiedGradientEvaluator(const PerforatedGrid& grid,
                                                       const Mollifier& moll,
                                                       int lattice_divisor)
    : grid_(&grid), moll_(&moll) {
    const double target = moll.delta / lattice_divisor;
    stride_ = std::max(1, static_cast<int>(std::lround(target / grid.h)));
    lo_i_ = -2;
    lo_j_ = -2;
    nx_ = grid.cells_x / stride_ + 6;
    ny_ = grid.cells_y / stride_ + 6;
    lx_.assign(static_cast<std::size_t>(nx_) * ny_, 0.0);
    ly_.assign(lx_.size(), 0.0);
}

void MollifiedGradientEvaluator::update(const ScalarField& u) {
    const auto& grid = *grid_;
    const auto& moll = *moll_;
    fill_cell_values(grid, u, cell_values_);

    const int R = moll.radius;
    const int side = moll.side();
    for (int lj = 0; lj < ny_; ++lj) {
        const int gj = (lo_j_ + lj) * stride_;
        for (int li = 0; li < nx_; ++li) {
            const int gi = (lo_i_ + li) * stride_;
            double ax = 0.0, ay = 0.0;
            for (int dj = -R; dj <= R + 1; ++dj) {
                const int cj = gj - dj;
                if (cj < 0 || cj >= grid.cells_y)
                    continue;
                const std::size_t krow = static_cast<std::size_t>(dj + R) * side;
                const std::size_t crow = static_cast<std::size_t>(cj) * grid.cells_x;
                const int di_hi = std::min(R + 1, gi);
                const int di_lo = std::max(-R, gi - grid.cells_x + 1);
                for (int di = di_lo; di <= di_hi; ++di) {
                    const double v = cell_values_[crow + (gi - di)];
                    if (v == 0.0)
                        continue;
                    ax += moll.gwx[krow + (di + R)] * v;
                    ay += moll.gwy[krow + (di + R)] * v;
                }
            }
            const std::size_t k = static_cast<std::size_t>(lj) * nx_ + li;
            lx_[k] = ax;
            ly_[k] = ay;
        }
    }
}

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
    return 0.5 * (2.0 * p1 + t * (p2 - p0) +
                  t * t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                  t * t * t * (3.0 * (p1 - p2) + p3 - p0));
}

} // namespace

std::array<double, 2> MollifiedGradientEvaluator::eval(double x, double y) const {
    const double s = stride_ * grid_->h;
    const double fx = x / s - lo_i_;
    const double fy = y / s - lo_j_;
    int i1 = static_cast<int>(std::floor(fx));
    int j1 = static_cast<int>(std::floor(fy));
    i1 = std::max(1, std::min(i1, nx_ - 3));
    j1 = std::max(1, std::min(j1, ny_ - 3));
    const double tx = fx - i1;
    const double ty = fy - j1;

    std::array<double, 2> out{0.0, 0.0};
    const std::vector<double>* comps[2] = {&lx_, &ly_};
    for (int c = 0; c < 2; ++c) {
        const auto& l = *comps[c];
        double rows[4];
        for (int r = 0; r < 4; ++r) {
            const std::size_t base = static_cast<std::size_t>(j1 - 1 + r) * nx_ + (i1 - 1);
            rows[r] = catmull_rom(l[base], l[base + 1], l[base + 2], l[base + 3], tx);
        }
        out[c] = catmull_rom(rows[0], rows[1], rows[2], rows[3], ty);
    }
    return out;
}

void MollifiedGradientEvaluator::eval_cell_centers(CellVectorField& out) const {
    const auto& grid = *grid_;
    for (int cj = 0; cj < grid.cells_y; ++cj)
        for (int ci = 0; ci < grid.cells_x; ++ci) {
            if (!grid.cell_material(ci, cj))
                continue;
            const auto g = eval((ci + 0.5) * grid.h, (cj + 0.5) * grid.h);
            const auto k = grid.cell_flat(ci, cj);
            out.vx[k] = g[0];
            out.vy[k] = g[1];
        }
}

double MollifiedGradientEvaluator::lattice_max_abs() const {
    double m = 0.0;
    for (std::size_t k = 0; k < lx_.size(); ++k)
        m = std::max(m, std::hypot(lx_[k], ly_[k]));
    return m;
}

} // namespace perihom
