#include "perihom/sparse.hpp"

#include "perihom/errors.hpp"
#include "perihom/kahan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace perihom {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<std::int32_t>&& rows,
                                         std::vector<std::int32_t>&& cols,
                                         std::vector<double>&& vals) {
    SparseMatrix A;
    A.n_ = n;
    const std::size_t nt = vals.size();

    std::vector<std::uint32_t> order(nt);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (rows[a] != rows[b])
            return rows[a] < rows[b];
        return cols[a] < cols[b];
    });

    A.row_ptr_.assign(n + 1, 0);
    std::int32_t prev_r = -1, prev_c = -1;
    for (std::size_t k = 0; k < nt; ++k) {
        const auto i = order[k];
        const auto r = rows[i], c = cols[i];
        if (r == prev_r && c == prev_c) {
            A.vals_.back() += vals[i];
        } else {
            A.col_idx_.push_back(c);
            A.vals_.push_back(vals[i]);
            ++A.row_ptr_[r + 1];
            prev_r = r;
            prev_c = c;
        }
    }
    for (int r = 0; r < n; ++r)
        A.row_ptr_[r + 1] += A.row_ptr_[r];
    return A;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += vals_[k] * x[col_idx_[k]];
        y[r] = acc;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

double SparseMatrix::quadratic_form(std::span<const double> x) const {
    return bilinear_form(x, x);
}

double SparseMatrix::bilinear_form(std::span<const double> x, std::span<const double> y) const {
    double acc = 0.0;
    for (int r = 0; r < n_; ++r) {
        double row = 0.0;
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            row += vals_[k] * y[col_idx_[k]];
        acc += x[r] * row;
    }
    return acc;
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> s(n_, 0.0);
    for (int r = 0; r < n_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            s[r] += vals_[k];
    return s;
}

double SparseMatrix::entry_sum() const {
    KahanSum acc;
    for (double v : vals_)
        acc.add(v);
    return acc.value();
}

double SparseMatrix::max_asymmetry() const {
    // build transpose lookup via a second CSR pass
    std::vector<std::int32_t> t_ptr(n_ + 1, 0);
    for (auto c : col_idx_)
        ++t_ptr[c + 1];
    for (int r = 0; r < n_; ++r)
        t_ptr[r + 1] += t_ptr[r];
    std::vector<std::int32_t> t_col(vals_.size());
    std::vector<double> t_val(vals_.size());
    std::vector<std::int32_t> cursor(t_ptr.begin(), t_ptr.end() - 1);
    for (int r = 0; r < n_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const auto c = col_idx_[k];
            t_col[cursor[c]] = r;
            t_val[cursor[c]] = vals_[k];
            ++cursor[c];
        }
    double worst = 0.0;
    for (int r = 0; r < n_; ++r) {
        auto ka = row_ptr_[r];
        auto kb = t_ptr[r];
        const auto ea = row_ptr_[r + 1], eb = t_ptr[r + 1];
        while (ka < ea || kb < eb) {
            const std::int32_t ca = ka < ea ? col_idx_[ka] : n_;
            const std::int32_t cb = kb < eb ? t_col[kb] : n_;
            if (ca == cb) {
                worst = std::max(worst, std::abs(vals_[ka] - t_val[kb]));
                ++ka;
                ++kb;
            } else if (ca < cb) {
                worst = std::max(worst, std::abs(vals_[ka]));
                ++ka;
            } else {
                worst = std::max(worst, std::abs(t_val[kb]));
                ++kb;
            }
        }
    }
    return worst;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int r = 0; r < n_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_idx_[k] == r)
                d[r] += vals_[k];
    return d;
}

void SparseMatrix::add_scaled(const SparseMatrix& other, double factor) {
    if (other.n_ != n_)
        throw AssemblyError("add_scaled: dimension mismatch");
    std::map<std::pair<std::int32_t, std::int32_t>, double> merged;
    for (int r = 0; r < n_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            merged[{r, col_idx_[k]}] += vals_[k];
    for (int r = 0; r < n_; ++r)
        for (auto k = other.row_ptr_[r]; k < other.row_ptr_[r + 1]; ++k)
            merged[{r, other.col_idx_[k]}] += factor * other.vals_[k];
    row_ptr_.assign(n_ + 1, 0);
    col_idx_.clear();
    vals_.clear();
    for (const auto& [rc, v] : merged) {
        ++row_ptr_[rc.first + 1];
        col_idx_.push_back(rc.second);
        vals_.push_back(v);
    }
    for (int r = 0; r < n_; ++r)
        row_ptr_[r + 1] += row_ptr_[r];
}

void SparseMatrix::scale(double factor) {
    for (auto& v : vals_)
        v *= factor;
}

std::string SparseMatrix::dump_coordinate() const {
    std::string out;
    char line[96];
    for (int r = 0; r < n_; ++r)
        for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            std::snprintf(line, sizeof(line), "%d %d %.17g\n", r, col_idx_[k], vals_[k]);
            out += line;
        }
    return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

void remove_mean(std::span<double> v) {
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    for (auto& x : v)
        x -= mean;
}

} // namespace

std::vector<double> solve_spd(const SparseMatrix& A, std::span<const double> rhs,
                              const SolveOptions& opts, SolveStats* stats) {
    const int n = A.dimension();
    std::vector<double> x(n, 0.0), r(rhs.begin(), rhs.end()), z(n), p(n), Ap(n);

    if (opts.deflate_constants)
        remove_mean(r);

    std::vector<double> inv_diag = A.diagonal();
    for (auto& d : inv_diag)
        d = d > 0.0 ? 1.0 / d : 1.0;

    const double rhs_norm = std::sqrt(dot(r, r));
    if (rhs_norm == 0.0) {
        if (stats)
            *stats = {0, 0.0};
        return x;
    }

    for (int i = 0; i < n; ++i)
        z[i] = inv_diag[i] * r[i];
    if (opts.deflate_constants)
        remove_mean(z);
    p = z;
    double rz = dot(r, z);

    int it = 0;
    double res = 1.0;
    for (; it < opts.max_iter; ++it) {
        res = std::sqrt(dot(r, r)) / rhs_norm;
        if (res <= opts.tol)
            break;
        A.multiply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0))
            throw SolverError("conjugate gradients: matrix not positive definite on the "
                              "search space",
                              res, it);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        if (opts.deflate_constants)
            remove_mean(r);
        for (int i = 0; i < n; ++i)
            z[i] = inv_diag[i] * r[i];
        if (opts.deflate_constants)
            remove_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }

    if (res > opts.tol)
        throw SolverError("conjugate gradients did not converge: residual " +
                              std::to_string(res) + " after " + std::to_string(it) +
                              " iterations",
                          res, it);
    if (opts.deflate_constants)
        remove_mean(x);
    if (stats)
        *stats = {it, res};
    return x;
}

} // namespace perihom
