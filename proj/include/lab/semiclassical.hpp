#pragma once

#include <string>
#include <vector>

#include "lab/grid.hpp"
#include "lab/potential.hpp"

namespace lab {

struct FlowState {
    double x = 0.0;
    double xi = 0.0;
    double t = 0.0;
};

// Velocity-Verlet integration of x' = 2 xi, xi' = -V'(x) from (y, eta) over time t.
FlowState flow_integrate(double y, double eta, double t, const Potential& V, long n_steps);
double flow_energy(const FlowState& s, const Potential& V);

struct ActionOptions {
    double tol = 1e-12;       // shooting tolerance on |x(t) - x|
    long n_steps = 2000;
    double delta_cfg = 1.0;   // small-time regime bound
    long path_samples = 64;
};

struct ActionResult {
    double S = 0.0;
    double S0 = 0.0;   // (x - y)^2 / (4t)
    double w = 0.0;    // (S - S0) / t
    double eta = 0.0;  // initial momentum of the path
    double residual = 0.0;
    std::vector<FlowState> path;
};

ActionResult classical_action(double t, double x, double y, const Potential& V, const ActionOptions& opt = {});

// Generating function of the x'' = -4x flow.
double harmonic_action(double t, double x, double y);

struct KernelOptions {
    double D = 2.0;        // central block |x|, |y| <= D / 2; also the largest |x - y| resolved
    long stride = 4;       // keep every stride-th grid point of the block
};

struct KernelSample {
    double t, x, y;
    cplx K;
    cplx k_amplitude;  // K (4 pi i t)^{1/2} e^{-iS}; zero until filled by amplitude_fill
};

struct KernelBlock {
    double t = 0.0;
    std::vector<long> index;  // grid indices of the block, used for both x and y
    std::vector<KernelSample> samples;  // row-major, x outer
    double k1 = 0.0, k2 = 0.0;          // spectral window flat below k1, zero above k2
    bool near_singular = false;
    const KernelSample& at(std::size_t i, std::size_t j) const { return samples[i * index.size() + j]; }
};

KernelBlock kernel_extract(double t, const Potential& V, const Grid1D& g, const KernelOptions& opt = {});
// Fills k_amplitude from classical actions along the unique short-time paths.
void amplitude_fill(KernelBlock& b, const Potential& V, const ActionOptions& opt = {});
double free_kernel_error(const KernelBlock& b);  // max relative deviation from the free kernel

struct AmplitudeRow {
    double t;
    double sup_k_minus_1;
    double noise;      // sup|k - 1| of the V = 0 extraction at the same t
    double sup_K;
};

struct AmplitudeFit {
    std::vector<AmplitudeRow> rows;
    double slope = 0.0;
    bool inconclusive = false;
};

AmplitudeFit amplitude_fit(const Potential& V, const std::vector<double>& ts, const Grid1D& g,
                           const KernelOptions& opt = {});

struct DispersiveRow {
    double t;
    double sup_K;
};

struct DispersiveFit {
    std::vector<DispersiveRow> rows;
    double slope = 0.0;
};

DispersiveFit dispersive_fit(const Potential& V, const std::vector<double>& ts, const Grid1D& g,
                             const KernelOptions& opt = {});

// Time-scale convention for the harmonic kernel, pinned on the ground state.
struct MehlerConvention {
    double time_scale = 1.0;
    double ground_error = 0.0;
    std::vector<double> candidates;
    std::vector<double> errors;
};

MehlerConvention calibrate_mehler(const Grid1D& g, double t_probe = 0.3);
cplx mehler_kernel(double t, double x, double y);
Field mehler_propagate(const Field& f, double t, const MehlerConvention& conv = {});

struct LipschitzProbe {
    double C;
    std::vector<double> t;
};

// max |S(t_i+1) - S(t_i)| / (t_i+1 - t_i) over a point set and a time grid.
LipschitzProbe action_lipschitz(const Potential& V, const std::vector<std::pair<double, double>>& xy,
                                const std::vector<double>& ts, const ActionOptions& opt = {});

std::string amplitude_csv(const AmplitudeFit& fit);
std::string dispersive_csv(const DispersiveFit& fit);

} // namespace lab
