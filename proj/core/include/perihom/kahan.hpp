#pragma once

#include <cmath>

namespace perihom {

// Neumaier-compensated accumulator. Quadrature sums feed exactness checks at
// 1e-12 relative tolerance, which plain left-to-right summation does not
// guarantee at ~1e5 terms.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace perihom
