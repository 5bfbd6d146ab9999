#include "perihom/field.hpp"

#include <string>

namespace perihom {

void CoefficientField::check_ellipticity(double lo, double hi) const {
    const int m = cell->micro_resolution;
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a) {
            if (!cell->material(a, b))
                continue;
            const auto ev = at_micro_cell(a, b).eigenvalues();
            if (ev[0] < lo - 1e-12 || ev[1] > hi + 1e-12)
                throw AssemblyError("coefficient eigenvalues [" + std::to_string(ev[0]) + ", " +
                                    std::to_string(ev[1]) + "] outside the ellipticity bounds [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
}

} // namespace perihom
