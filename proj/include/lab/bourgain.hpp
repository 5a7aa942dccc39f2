#pragma once

#include <functional>
#include <vector>

#include "lab/grid.hpp"
#include "lab/potential.hpp"
#include "lab/weights.hpp"

namespace lab {

// u(t, x) on a periodic window [t0, t1) with n_t uniform samples; row m is t0 + m dt.
struct SpacetimeField {
    Grid1D grid;
    double t0 = 0.0;
    double t1 = 1.0;
    long n_t = 0;
    CVec values;

    SpacetimeField(const Grid1D& g, double t0_, double t1_, long n_t_);
    double dt() const { return (t1 - t0) / static_cast<double>(n_t); }
    double t(long m) const { return t0 + static_cast<double>(m) * dt(); }
    double tau(long m) const;  // signed temporal frequency of storage row m
    cplx* row(long m) { return values.data() + m * grid.n; }
    const cplx* row(long m) const { return values.data() + m * grid.n; }
    bool all_finite() const;
};

struct XsbParams {
    double s = 0.0;
    double b = 0.0;
};

// eta(t / delta), eta = 1 on [-1, 1], 0 outside [-2, 2].
struct CutoffProfile {
    double delta = 1.0;
    double operator()(double t) const;
};

// Weight <tau + xi^2> (plus) or <tau - xi^2> (minus, the conjugate branch).
enum class Dispersion { plus, minus };

double xsb_norm(const SpacetimeField& u, const XsbParams& p, Dispersion d = Dispersion::plus);

using SliceSource = std::function<Field(double t)>;

// eta(t/delta) source(t) sampled on [-2 delta, 2 delta).
SpacetimeField windowed_field(const Grid1D& g, const SliceSource& source, const CutoffProfile& eta, long n_t);
SpacetimeField windowed_free(const Field& f, const CutoffProfile& eta, long n_t);

// Smallest power of two >= 256 that keeps the free dispersion relation of the grid un-aliased.
long min_time_samples(const Grid1D& g, double delta);

double linear_estimate_ratio(const Field& f, const XsbParams& p, const CutoffProfile& eta, long n_t);
// The same ratio with the potential propagator exp(-itH) in place of the free flow.
double potential_linear_ratio(const Field& f, const Potential& V, const XsbParams& p, const CutoffProfile& eta,
                              long n_t);

struct DeltaGainRow {
    double delta;
    double ratio;
};

struct DeltaGain {
    std::vector<DeltaGainRow> rows;
    double slope;
};

DeltaGain delta_gain_ratio(const Grid1D& g, const SliceSource& source, double s, double b, double b_prime,
                           const std::vector<double>& deltas, long n_t);

// ||Vu||_{X^{s+a,-gamma}} / (||V||_2 ||u||_{X^{s,b}}), ||V||_2 the grid L2 norm.
double smoothing_ratio(const Potential& V, const SpacetimeField& u, const EstimateParams& p, bool enforce = true);

// The lattice form of the weight supremum that majorizes smoothing_ratio^2 by Cauchy-Schwarz.
double weight_sup_lattice(const EstimateParams& p, const Grid1D& g, double window, long n_t);

} // namespace lab
