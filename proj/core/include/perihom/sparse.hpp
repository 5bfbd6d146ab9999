#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace perihom {

// Compressed-row symmetric-positive-(semi)definite matrices as produced by
// the Q1 assembly routines.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int n,
                                      std::vector<std::int32_t>&& rows,
                                      std::vector<std::int32_t>&& cols,
                                      std::vector<double>&& vals);

    int dimension() const { return n_; }
    std::size_t nonzeros() const { return vals_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    double quadratic_form(std::span<const double> x) const;
    // x^T A y
    double bilinear_form(std::span<const double> x, std::span<const double> y) const;

    std::vector<double> row_sums() const;
    double entry_sum() const;
    // max |A - A^T| over all entries
    double max_asymmetry() const;
    std::vector<double> diagonal() const;

    void add_scaled(const SparseMatrix& other, double factor); // same sparsity not required
    void scale(double factor);

    // coordinate text dump (row col value), small cases only
    std::string dump_coordinate() const;

    std::span<const std::int32_t> row_ptr() const { return row_ptr_; }
    std::span<const std::int32_t> col_idx() const { return col_idx_; }
    std::span<const double> values() const { return vals_; }

private:
    int n_ = 0;
    std::vector<std::int32_t> row_ptr_;
    std::vector<std::int32_t> col_idx_;
    std::vector<double> vals_;
};

// Accumulates element contributions; duplicate (row, col) pairs are summed in
// a deterministic order at compression time.
class TripletAccumulator {
public:
    explicit TripletAccumulator(int n, std::size_t reserve_hint = 0) : n_(n) {
        if (reserve_hint) {
            rows_.reserve(reserve_hint);
            cols_.reserve(reserve_hint);
            vals_.reserve(reserve_hint);
        }
    }
    void add(std::int32_t r, std::int32_t c, double v) {
        rows_.push_back(r);
        cols_.push_back(c);
        vals_.push_back(v);
    }
    SparseMatrix compress() {
        return SparseMatrix::from_triplets(n_, std::move(rows_), std::move(cols_),
                                           std::move(vals_));
    }

private:
    int n_ = 0;
    std::vector<std::int32_t> rows_, cols_;
    std::vector<double> vals_;
};

struct SolveOptions {
    double tol = 1e-10;   // relative residual
    int max_iter = 20000;
    bool deflate_constants = false; // pure-Neumann kernel handling
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients. Throws SolverError on
// non-convergence. With deflate_constants the rhs and iterates are kept
// orthogonal to the constant vector and the solution comes back mean-free.
std::vector<double> solve_spd(const SparseMatrix& A, std::span<const double> rhs,
                              const SolveOptions& opts = {}, SolveStats* stats = nullptr);

} // namespace perihom
