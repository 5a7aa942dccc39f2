#pragma once

#include <vector>

namespace lab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// Slope of log(y) against log(x).
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ProportionalFit {
    double c = 0.0;
    std::vector<double> rel_residuals; // (y_i - c x_i) / y_i
    double max_rel_residual = 0.0;
};
// Least squares y = c x through the origin.
ProportionalFit fit_proportional(const std::vector<double>& x, const std::vector<double>& y);

} // namespace lab
