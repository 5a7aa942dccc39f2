#include <cmath>
#include <cstdlib>

#include "lab/error.hpp"
#include "lab/fit.hpp"
#include "lab/parallel.hpp"

namespace lab {

namespace {
std::atomic<unsigned> g_threads{1};
}

void set_threads(unsigned n) { g_threads = n == 0 ? 1 : n; }
unsigned threads() { return g_threads; }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw LabError(ErrorCode::invalid_argument, "fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw LabError(ErrorCode::invalid_argument, "degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i)
        f.max_abs_residual = std::max(f.max_abs_residual, std::abs(y[i] - f.slope * x[i] - f.intercept));
    return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw LabError(ErrorCode::invalid_argument, "log fit needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

ProportionalFit fit_proportional(const std::vector<double>& x, const std::vector<double>& y) {
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    if (sxx == 0.0) throw LabError(ErrorCode::invalid_argument, "degenerate abscissae");
    ProportionalFit f;
    f.c = sxy / sxx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = (y[i] - f.c * x[i]) / y[i];
        f.rel_residuals.push_back(r);
        f.max_rel_residual = std::max(f.max_rel_residual, std::abs(r));
    }
    return f;
}

} // namespace lab

#include <charconv>
#include <cmath>

#include "lab/format.hpp"

namespace lab {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace lab
