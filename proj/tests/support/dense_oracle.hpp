#pragma once

// Test-only dense linear algebra and a from-scratch Q1 assembly, independent
// of the library's sparse path. Used as the oracle for solver and stepper
// checks on coarse grids.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(int rows, int cols) : r_(rows), c_(cols), v_(static_cast<std::size_t>(rows) * cols, 0.0) {}
    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * c_ + j]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * c_ + j]; }
    int rows() const { return r_; }
    int cols() const { return c_; }

private:
    int r_ = 0, c_ = 0;
    std::vector<double> v_;
};

// Gaussian elimination with partial pivoting
inline std::vector<double> solve_dense(DenseMatrix a, std::vector<double> b) {
    const int n = a.rows();
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k)))
                piv = i;
        if (a(piv, k) == 0.0)
            throw std::runtime_error("dense oracle: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j)
                std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0)
                continue;
            for (int j = k; j < n; ++j)
                a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j)
            s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

// Q1 shape values and gradients at a quadrature point of the unit square,
// corners ordered (0,0), (1,0), (1,1), (0,1)
inline std::array<double, 4> shape(double x, double y) {
    return {(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y};
}
inline std::array<std::array<double, 2>, 4> shape_grad(double x, double y) {
    return {{{-(1 - y), -(1 - x)}, {(1 - y), -x}, {y, x}, {-y, 1 - x}}};
}

struct Gauss2 {
    static constexpr double a = 0.2113248654051871177;
    static constexpr double b = 0.7886751345948128823;
    std::array<std::array<double, 2>, 4> pts{{{a, a}, {b, a}, {a, b}, {b, b}}};
    double w = 0.25;
};

// element mass (times h^2) into a 4x4 block
inline std::array<std::array<double, 4>, 4> element_mass(double h) {
    Gauss2 q;
    std::array<std::array<double, 4>, 4> m{};
    for (const auto& p : q.pts) {
        const auto n = shape(p[0], p[1]);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                m[i][j] += q.w * h * h * n[i] * n[j];
    }
    return m;
}

// element stiffness for a constant symmetric 2x2 coefficient (h-free in 2d)
inline std::array<std::array<double, 4>, 4> element_stiffness(double a11, double a12,
                                                              double a22) {
    Gauss2 q;
    std::array<std::array<double, 4>, 4> k{};
    for (const auto& p : q.pts) {
        const auto g = shape_grad(p[0], p[1]);
        for (int i = 0; i < 4; ++i) {
            const double cx = a11 * g[i][0] + a12 * g[i][1];
            const double cy = a12 * g[i][0] + a22 * g[i][1];
            for (int j = 0; j < 4; ++j)
                k[i][j] += q.w * (cx * g[j][0] + cy * g[j][1]);
        }
    }
    return k;
}

} // namespace oracle
