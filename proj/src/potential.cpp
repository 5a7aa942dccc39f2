#include "lab/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lab/error.hpp"

namespace lab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Potential Potential::zero() { return Potential{}; }

Potential Potential::constant(double c) {
    Potential p;
    p.kind = PotentialKind::constant;
    p.value = c;
    p.in_L2 = c == 0.0;
    p.l2_norm = c == 0.0 ? 0.0 : kInf;
    return p;
}

Potential Potential::gaussian_well(double depth, double width) {
    if (!(width > 0.0)) throw LabError(ErrorCode::invalid_argument, "gaussian_well width must be positive");
    Potential p;
    p.kind = PotentialKind::gaussian_well;
    p.depth = depth;
    p.width = width;
    p.l2_norm = std::abs(depth) * std::sqrt(width * std::sqrt(std::numbers::pi / 2.0));
    p.lip_norm = std::abs(depth) * std::numbers::sqrt2 * std::exp(-0.5) / width;
    return p;
}

Potential Potential::square_well(double depth, double half_width) {
    if (!(half_width > 0.0)) throw LabError(ErrorCode::invalid_argument, "square_well half width must be positive");
    Potential p;
    p.kind = PotentialKind::square_well;
    p.depth = depth;
    p.width = half_width;
    p.l2_norm = std::abs(depth) * std::sqrt(2.0 * half_width);
    p.lip_norm = depth == 0.0 ? 0.0 : kInf;
    p.in_W1inf = depth == 0.0;
    p.bounded_second_derivatives = depth == 0.0;
    return p;
}

Potential Potential::quadratic() {
    Potential p;
    p.kind = PotentialKind::quadratic;
    p.l2_norm = kInf;
    p.lip_norm = kInf;
    p.in_L2 = false;
    p.in_W1inf = false;
    p.bounded_second_derivatives = true;
    return p;
}

Potential Potential::tabulated(const Grid1D& g, RVec values) {
    if (values.size() != g.n) throw LabError(ErrorCode::invalid_argument, "tabulated potential length differs from grid");
    double acc = 0.0, lip = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        if (!std::isfinite(values[j])) throw LabError(ErrorCode::invalid_argument, "tabulated potential must be finite");
        acc += values[j] * values[j];
        const double d = (values[(j + 1) % g.n] - values[j]) / g.dx;
        lip = std::max(lip, std::abs(d));
    }
    Potential p;
    p.kind = PotentialKind::tabulated;
    p.table = std::move(values);
    p.table_grid = g;
    p.l2_norm = std::sqrt(g.dx * acc);
    p.lip_norm = lip;
    return p;
}

Potential Potential::scaled(double c) const {
    switch (kind) {
    case PotentialKind::zero: return *this;
    case PotentialKind::constant: return constant(c * value);
    case PotentialKind::gaussian_well: return gaussian_well(c * depth, width);
    case PotentialKind::square_well: return square_well(c * depth, width);
    case PotentialKind::quadratic:
        if (c == 1.0) return *this;
        throw LabError(ErrorCode::invalid_argument, "scaled quadratic potential is not supported");
    case PotentialKind::tabulated: {
        RVec v = table;
        for (auto& y : v) y *= c;
        return tabulated(table_grid, std::move(v));
    }
    }
    return *this;
}

double Potential::operator()(double x) const {
    switch (kind) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::constant: return value;
    case PotentialKind::gaussian_well: return -depth * std::exp(-x * x / (width * width));
    case PotentialKind::square_well: return std::abs(x) < width ? -depth : 0.0;
    case PotentialKind::quadratic: return x * x;
    case PotentialKind::tabulated: {
        // periodic linear interpolation
        const auto& g = table_grid;
        double u = (x + 0.5 * g.length) / g.dx;
        u -= std::floor(u / static_cast<double>(g.n)) * static_cast<double>(g.n);
        const auto j = static_cast<std::size_t>(u) % g.n;
        const double w = u - std::floor(u);
        return (1.0 - w) * table[j] + w * table[(j + 1) % g.n];
    }
    }
    return 0.0;
}

double Potential::derivative(double x) const {
    switch (kind) {
    case PotentialKind::zero:
    case PotentialKind::constant: return 0.0;
    case PotentialKind::gaussian_well: {
        const double w2 = width * width;
        return 2.0 * depth * x / w2 * std::exp(-x * x / w2);
    }
    case PotentialKind::quadratic: return 2.0 * x;
    case PotentialKind::square_well:
    case PotentialKind::tabulated: break;
    }
    throw LabError(ErrorCode::inapplicable, "potential has no pointwise derivative");
}

RVec Potential::sample(const Grid1D& g) const {
    if (kind == PotentialKind::tabulated) {
        if (!(table_grid == g)) throw LabError(ErrorCode::invalid_argument, "tabulated potential lives on a different grid");
        return table;
    }
    RVec v(g.n);
    for (std::size_t j = 0; j < g.n; ++j) v[j] = (*this)(g.x(j));
    return v;
}

std::string Potential::describe() const {
    std::ostringstream os;
    switch (kind) {
    case PotentialKind::zero: os << "zero"; break;
    case PotentialKind::constant: os << "constant(" << value << ")"; break;
    case PotentialKind::gaussian_well: os << "gaussian_well(" << depth << "," << width << ")"; break;
    case PotentialKind::square_well: os << "square_well(" << depth << "," << width << ")"; break;
    case PotentialKind::quadratic: os << "quadratic"; break;
    case PotentialKind::tabulated: os << "tabulated(" << table.size() << ")"; break;
    }
    return os.str();
}

} // namespace lab
