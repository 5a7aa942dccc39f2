#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lab/grid.hpp"
#include "lab/potential.hpp"

namespace lab {

Field free_propagate(const Field& f, double t);
Field potential_phase(const Field& f, double t, const Potential& V);

// Dense eigendecomposition of H = spectral(-d_xx) + diag(V) on the grid.
struct Eigenpairs {
    Grid1D grid;
    RVec values;  // ascending
    RVec vectors; // column-major n x n, orthonormal in the plain Euclidean product
};
constexpr std::size_t kOracleMaxPoints = 2048;
std::shared_ptr<const Eigenpairs> oracle_eigenpairs(const Grid1D& g, const Potential& V);

Field exact_propagate(const Field& f, double t, const Potential& V);

enum class Scheme { lie, strang };
const char* to_string(Scheme s);

struct EvolveReport {
    Field final;
    double l2_drift = 0.0;
    long steps = 0;
    std::string method;
};

EvolveReport trotter_evolve(const Field& f, double t, long n, const Potential& V, Scheme scheme);

struct GrowthRow {
    double t = 0.0;
    double ratio = 0.0;
    double bound = 0.0; // exp(s t |V'|_inf)
    bool within = false;
};
std::vector<GrowthRow> hs_growth_check(const Potential& V, const Field& f, const std::vector<double>& t_grid,
                                       double s = 1.0, double tol = 5e-2);

// Picard iteration of u(t) = S(t)u0 - i int_0^t S(t - t') F(u(t')) dt', S(t) = exp(i t d_xx).
// The forcing writes F(u) for a physical-space slice.
using Forcing = std::function<void(const CVec& u, CVec& out)>;

struct PicardOptions {
    int max_iter = 60;
    double tol = 1e-10;
    int n_t = 64;            // initial time sub-intervals
    int max_n_t = 1 << 14;
    bool refine = true;      // double n_t until the endpoint change < tol / 10
};

struct PicardResult {
    std::vector<Field> trajectory; // n_t + 1 uniform slices in [0, t]
    int iterations = 0;
    double last_ratio = 0.0;
    std::vector<double> ratios;
    int n_t = 0;
    bool quadrature_converged = true;
    double refinement_change = 0.0;
};

PicardResult picard_solve(const Field& u0, double t, const Forcing& F, const PicardOptions& opt);

double default_delta(const Potential& V);

struct DuhamelResult {
    Field final;
    int iterations = 0;
    double last_ratio = 0.0;
    std::vector<double> ratios;
    int n_t = 0;
    bool quadrature_converged = true;
};

// delta <= 0 selects default_delta(V).
DuhamelResult duhamel_solve(const Field& f, double t, const Potential& V, const PicardOptions& opt = {},
                            double delta = 0.0);

} // namespace lab
