#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "lab/grid.hpp"

namespace lab {

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

// fhat_k = dx * sum_j f_j exp(-i x_j xi_k), storage order.
CVec dft(const Field& f);
// f_j = (1/L) sum_k fhat_k exp(i x_j xi_k).
Field idft(const Grid1D& g, const CVec& fhat);

// In-place variants on raw vectors sharing the same conventions.
void dft_inplace(const Grid1D& g, CVec& v);
void idft_inplace(const Grid1D& g, CVec& v);

double l2_norm(const Field& f);                        // sqrt(dx sum |f|^2)
double l2_distance(const Field& a, const Field& b);
double sobolev_norm(const Field& f, double s);
double sobolev_norm_hat(const Grid1D& g, const CVec& fhat, double s);

enum class DataKind { gaussian, single_mode, random_hs, dk_packet, compact_bump };
enum class Normalization { none, l2_unit, hs_unit };

struct DataSpec {
    DataKind kind = DataKind::gaussian;
    double width = 1.0;      // gaussian: exp(-(x-c)^2/(2 w^2)); bump: support radius
    double center = 0.0;     // gaussian, compact_bump, dk_packet (spatial shift)
    long mode = 0;           // single_mode lattice index
    double s = 0.25;         // random_hs
    double epsilon = 0.05;   // random_hs
    std::uint64_t seed = 0;  // random_hs
    double envelope = 0.0;   // random_hs: optional Gaussian envelope width, 0 = none
    double R = 400.0;        // dk_packet
    double amplitude = 1.0;  // multiplies the field after normalization
    Normalization normalization = Normalization::none;
    double norm_s = 0.0;     // index used by hs_unit
};

Field generate(const DataSpec& spec, const Grid1D& g);

// Standard complex Gaussian keyed on (seed, mode); same pair gives the same draw
// on every grid sharing the lattice spacing.
cplx keyed_complex_gaussian(std::uint64_t seed, long mode);

// Smooth cutoff equal to 1 on |x - c| <= inner, 0 on |x - c| >= outer.
double plateau_bump(double x, double center, double inner, double outer);
// C-infinity bump exp(1 - 1/(1 - r^2)), r = |x - c| / width.
double compact_bump(double x, double center, double width);

struct WrapCheck {
    double boundary_fraction = 0.0; // mass with |x| >= L/4 over total mass
    bool flagged = false;
};
WrapCheck wrap_check(const Field& f, double threshold = 1e-6);

} // namespace lab
