#include "lab/grid.hpp"

#include <cmath>
#include <numbers>

#include "lab/error.hpp"

namespace lab {

const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::unrepresentable_spec: return "unrepresentable-spec";
    case ErrorCode::oracle_unavailable: return "oracle-unavailable";
    case ErrorCode::inapplicable: return "inapplicable";
    case ErrorCode::contraction_failure: return "contraction-failure";
    case ErrorCode::step_singularity: return "step-singularity";
    case ErrorCode::blowup_detected: return "blowup-detected";
    case ErrorCode::undefined_ratio: return "undefined-ratio";
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::singular_kernel: return "singular-kernel";
    case ErrorCode::near_singular_time: return "near-singular-time";
    case ErrorCode::no_unique_path: return "no-unique-path";
    case ErrorCode::inconclusive: return "inconclusive";
    case ErrorCode::config_error: return "config-error";
    }
    return "unknown";
}

double Grid1D::xi(std::size_t k) const {
    return 2.0 * std::numbers::pi * static_cast<double>(mode(k)) / length;
}

double Grid1D::xi_max() const { return std::numbers::pi * static_cast<double>(n) / length; }

RVec Grid1D::xs() const {
    RVec v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = x(j);
    return v;
}

RVec Grid1D::xis() const {
    RVec v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = xi(k);
    return v;
}

std::size_t Grid1D::index_of_mode(long m) const {
    long nn = static_cast<long>(n);
    if (m < -nn / 2 || m >= nn / 2) throw LabError(ErrorCode::invalid_argument, "mode outside lattice");
    return static_cast<std::size_t>(m < 0 ? m + nn : m);
}

Grid1D make_grid(long n_points, double length) {
    if (n_points < 16 || n_points > (1L << 22) || (n_points & (n_points - 1)) != 0)
        throw LabError(ErrorCode::invalid_argument, "n_points must be a power of two in [16, 2^22]");
    if (!(length > 0.0) || !std::isfinite(length))
        throw LabError(ErrorCode::invalid_argument, "length must be positive");
    Grid1D g;
    g.n = static_cast<std::size_t>(n_points);
    g.length = length;
    g.dx = length / static_cast<double>(n_points);
    return g;
}

Field::Field(const Grid1D& g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.n) throw LabError(ErrorCode::invalid_argument, "field length differs from grid size");
}

bool Field::all_finite() const {
    for (const auto& z : values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

} // namespace lab
