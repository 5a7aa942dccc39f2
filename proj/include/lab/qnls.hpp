#pragma once

#include <string>
#include <vector>

#include "lab/grid.hpp"
#include "lab/propagators.hpp"

namespace lab {

enum class Nonlinearity { N1, N2, N3 }; // u^2, u*conj(u), conj(u)^2
const char* to_string(Nonlinearity nl);
cplx apply_nonlinearity(Nonlinearity nl, cplx u);

struct QnlsRun {
    std::vector<Field> trajectory; // trajectory[0] is the initial datum, uniform times
    std::vector<double> times;
    std::string method;
    int iterations = 0;      // Picard only
    double last_ratio = 0.0; // Picard only
    long steps = 0;          // split-step only
};

// Strang splitting free(h/2) o nonlinear(h) o free(h/2). n_samples slices are kept
// besides the initial one; n_steps must be a multiple of n_samples.
QnlsRun qnls_split_step(const Field& f, double t_final, long n_steps, Nonlinearity nl, int n_samples = 1);

QnlsRun qnls_duhamel(const Field& f, double t_final, Nonlinearity nl, const PicardOptions& opt = {}, int n_samples = 0);

struct TailRow {
    double t = 0.0;
    double tail = 0.0; // |u(t) - S(t)u0|_{H^s}
};
std::vector<TailRow> duhamel_tail_regularity(const QnlsRun& run, double s);

} // namespace lab
