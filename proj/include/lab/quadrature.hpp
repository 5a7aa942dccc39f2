#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace lab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod on a finite interval.
QuadResult integrate_finite(const RealFn& f, double a, double b, double rel_tol = 1e-10);

// A location where the integrand varies on length `scale`.
struct Feature {
    double center;
    double scale;
};

// Integral over [lo, hi] (either end may be infinite) with geometric breakpoints
// around every feature and double-exponential tails. Converged means the summed
// error estimate is below 1e-6 relative.
QuadResult integrate_line(const RealFn& f, double lo, double hi, const std::vector<Feature>& features,
                          double rel_tol = 1e-10);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

} // namespace lab
