#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lab/grid.hpp"
#include "lab/potential.hpp"
#include "lab/qnls.hpp"

namespace lab {

struct TimeGrid {
    enum class Kind { dyadic, uniform };
    Kind kind = Kind::dyadic;
    double t_max = 1.0;
    long n = 1; // scales for dyadic, points for uniform

    static TimeGrid dyadic(double t_max, long n_scales);
    static TimeGrid uniform(double t_max, long n);
    // dyadic: t_max 2^-k for k < n; uniform: t_max i / n for i = 1..n.
    std::vector<double> times() const;
};

struct Evolver {
    std::string tag;
    std::function<Field(const Field&, double)> apply;
};

Evolver free_evolver();
Evolver exact_evolver(const Potential& V);
Evolver trotter_evolver(const Potential& V, double max_step = 1e-3);
Evolver qnls_evolver(Nonlinearity nl, double max_step = 1e-4);

struct MaximalReport {
    Grid1D grid;
    RVec max_dev; // max_k |u(t_k, x) - f(x)|
    std::string tag;

    double divergence_measure(double eps) const; // dx #{j : M_j > eps}
    std::vector<double> divergence_measures(const std::vector<double>& eps) const;
};

MaximalReport maximal_deviation(const Field& f, const Evolver& ev, const TimeGrid& tg);

struct DkOptions {
    long n = 1 << 16;
    double length = 16.0;
    double window_lo = 0.5;
    double window_hi = 1.0;
    TimeGrid times = TimeGrid::dyadic(1.0, 26);
};

struct DkRow {
    double s = 0.0;
    double R = 0.0;
    double peak = 0.0; // max over window and times of |e^{it d_xx} f_R|
    double hs = 0.0;
    double G = 0.0;
    double t_star = 0.0;
    double x_star = 0.0;
};

struct DkSweep {
    std::vector<DkRow> rows;
    std::vector<double> s_list;
    std::vector<double> slopes; // log G against log R, one per s
};

DkSweep dk_threshold_sweep(const std::vector<double>& s_list, const std::vector<double>& R_list,
                           const DkOptions& opt = {}, const Evolver& ev = free_evolver());

struct LocalityRow {
    double t = 0.0;
    double diff = 0.0; // sup over E of |U(t) f - U_0(t) f|
};

struct LocalityTable {
    std::vector<LocalityRow> rows;
    bool decreasing = false;
    double final_over_initial = 0.0;
};

// E = [e_lo, e_hi]; f must vanish there.
LocalityTable locality_probe(const Field& f, const Evolver& ev, double e_lo, double e_hi, const TimeGrid& tg);

struct LocalizedOptions {
    long n = 1 << 16;
    double length = 16.0;
    double phi_center = -3.0; // plateau window: 1 within phi_inner, 0 beyond phi_outer
    double phi_inner = 0.5;
    double phi_outer = 1.0;
    double j_lo = -1.0;
    double j_hi = 1.0;
    TimeGrid times = TimeGrid::uniform(0.005, 10240);
};

// |max_k |e^{it_k d_xx}(f phi)| |_{L^p(J)} / |f|_{H^s}
double localized_maximal_ratio(const Field& f, double s, double p, const LocalizedOptions& opt);

struct LocalizedRow {
    double s = 0.0;
    double R = 0.0;
    double lp = 0.0;
    double hs = 0.0;
    double rho = 0.0;
};

struct LocalizedProbe {
    std::vector<LocalizedRow> rows;
    std::vector<double> s_list;
    std::vector<bool> increasing;
    std::vector<double> spread; // max rho / min rho per s
};

// One packet per R, centred on the window; the maximal function is computed once per R.
LocalizedProbe localized_maximal_probe(const std::vector<double>& s_list, double p, const std::vector<double>& R_list,
                                       const LocalizedOptions& opt = {});

struct ConvCsvRow {
    std::string experiment;
    double s = 0.0;
    double R = 0.0;
    double t_max = 0.0;
    double epsilon = 0.0;
    double measure = 0.0;
    double ratio = 0.0;
    double slope = 0.0;
};
std::string conv_csv_header();
std::string conv_csv(const std::vector<ConvCsvRow>& rows);

} // namespace lab
