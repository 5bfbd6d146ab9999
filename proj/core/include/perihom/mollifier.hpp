#pragma once

#include "perihom/field.hpp"
#include "perihom/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace perihom {

// Discrete mollifier J_δ(x) = C exp(1/(|x|² - δ²)) for |x| < δ, sampled on the
// grid spacing and renormalized to unit sum. The gradient tables carry the
// same normalization constant so ∇^δ is exactly the gradient kernel of the
// smoothing kernel.
struct Mollifier {
    double delta = 0.0;
    double h = 0.0;
    int radius = 0; // integer offsets run over [-radius, radius+1]

    // tables on the half-offset lattice (node minus cell center), row-major
    std::vector<double> jw, gwx, gwy;
    double weight_sum = 0.0; // 1 after renormalization

    int side() const { return 2 * radius + 2; }
    std::size_t at(int di, int dj) const {
        return static_cast<std::size_t>(dj + radius) * side() + (di + radius);
    }
};

Mollifier make_mollifier(double delta, double h);

struct MollifierCheck {
    bool admissible = true;      // hard requirement: δ > 2ε diam(T)
    bool strict_bound_ok = true;  // δ > 2ε diam(Y)
    std::string message;
};

MollifierCheck check_mollifier(double delta, double epsilon, const CellGeometry& geom);
// throws ParameterError when the hard requirement fails
void require_mollifier(double delta, double epsilon, const CellGeometry& geom);

// values over the complete node grid; ∇^δ u lives on all of Ω, holes included
struct FullNodeVectorField {
    const PerforatedGrid* grid = nullptr;
    std::vector<double> vx, vy;

    FullNodeVectorField() = default;
    explicit FullNodeVectorField(const PerforatedGrid& g)
        : grid(&g),
          vx(static_cast<std::size_t>(g.cells_x + 1) * (g.cells_y + 1), 0.0),
          vy(vx.size(), 0.0) {}
    std::size_t at(int gi, int gj) const {
        return static_cast<std::size_t>(gj) * (grid->cells_x + 1) + gi;
    }
};

// ∇^δ u by exact discrete convolution; u is extended by zero into the pores
// and outside Ω.
FullNodeVectorField mollified_gradient(const ScalarField& u, const Mollifier& moll);

// sup-norm of the field and the measured constant in ‖∇^δu‖_∞ ≤ C_δ ‖u‖_L²
double max_abs(const FullNodeVectorField& f);

// Time steppers evaluate ∇^δ through this: exact convolution on a coarse node
// lattice (spacing ≈ δ/divisor, snapped to the grid) and Catmull–Rom
// interpolation at query points. Micro and limit runs share the same path.
class MollifiedGradientEvaluator {
public:
    MollifiedGradientEvaluator(const PerforatedGrid& grid, const Mollifier& moll,
                               int lattice_divisor = 12);

    void update(const ScalarField& u);
    std::array<double, 2> eval(double x, double y) const;
    void eval_cell_centers(CellVectorField& out) const;
    double lattice_max_abs() const;

private:
    const PerforatedGrid* grid_;
    const Mollifier* moll_;
    int stride_ = 1;   // lattice spacing in grid cells
    int lo_i_ = 0, lo_j_ = 0;
    int nx_ = 0, ny_ = 0;
    std::vector<double> lx_, ly_;       // lattice values
    std::vector<double> cell_values_;   // zero-extended piecewise constants
};

} // namespace perihom
