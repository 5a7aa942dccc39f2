#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lab/quadrature.hpp"

namespace lab {

struct EstimateParams {
    double s = 0.25;
    double a = 0.2;
    double b = 0.55;
    double gamma = 0.35;
};

// Admissibility: nullopt when admissible, otherwise the violated constraint.
std::optional<std::string> linear_violation(const EstimateParams& p);
std::optional<std::string> n1_violation(const EstimateParams& p);
std::optional<std::string> n2_violation(const EstimateParams& p);

// phi_beta of the convolution bound (up to constants).
double phi_beta(double beta, double a);

struct ConvolutionCheck {
    double lhs;
    double rhs_bound;
    double ratio;
    bool converged;
};

ConvolutionCheck calculus_convolution_check(double beta, double gamma, double a1, double a2);

struct ConvolutionFit {
    double C;
    std::vector<double> d;
    std::vector<double> ratio;
};

// Single constant C = max lhs/rhs across a list of separations.
ConvolutionFit convolution_fit(double beta, double gamma, const std::vector<double>& separations);

struct TauProductMin {
    double value;
    double tau;
};

TauProductMin tau_product_lower(double a, double b);

// Closed form of the minimum of <t-a><t-b>/<a-b> over t, as a function of |a-b|.
double tau_product_min_exact(double d);

struct ScanDomain {
    double xi_max = 1e2;
    double tau_max = 1e4;
    int per_decade = 12;
};

struct SupScanResult {
    std::string lemma;
    EstimateParams params;
    double sup_value = 0.0;
    double xi_star = 0.0;
    double tau_star = 0.0;
    ScanDomain domain;
    std::vector<double> domain_sups;  // base domain, one doubling, two doublings
    double tail_ratio = 1.0;         // last growth ratio
    bool diverged = false;
    bool converged = true;
};

// Linear-estimate weight, exact xi_1 quadrature.
double linear_Jtilde(double tau, double s, double b);
double linear_I(const EstimateParams& p, double xi, double tau);
// Tail function J(tau) = int_0^inf dz/(<z>^s <z+tau>^{2b} sqrt z).
double linear_J(double tau, double s, double b);

SupScanResult weight_sup_linear(const EstimateParams& p, const ScanDomain& dom, bool enforce = true);

struct BandCheck {
    std::vector<double> x;
    std::vector<double> value;
    double c1;
    double c2;
    double ratio;
};

// J(tau)<tau>^{s+1/2} over |tau| in [1, 1e4], both signs.
BandCheck linear_tail_band(double s, double b, int points = 41);

// N1 reduced weight and its one-dimensional rate integral.
double n1_R(const EstimateParams& p, double xi);
double n1_R_eta(const EstimateParams& p, double xi);
double n1_I(double gamma, double xi);
double n3_R(const EstimateParams& p, double xi);
double n1_zero_mode_truncated(double gamma, double M);
SupScanResult weight_sup_n1(const EstimateParams& p, const ScanDomain& dom, bool enforce = true);
// I(xi)<xi>^{4g-1} when japanese_weight, else I(xi) xi^{4g-1}, over xi in [1, 100].
BandCheck n1_rate_band(double gamma, bool japanese_weight, int points = 41);

struct DominationCheck {
    long nodes;
    long violations;
    double min_ratio;
};
DominationCheck n3_domination(double half_width, int nodes_per_axis);

// N2 reduced integrand with the xi_1 integral over [-M, M] (M infinite allowed).
double n2_value(const EstimateParams& p, double xi, double tau, double M = kInfinity);
// The same quantity with the tau_1 integral done by quadrature instead of the closed bound.
double n2_value_direct(const EstimateParams& p, double xi, double tau);
SupScanResult weight_sup_n2(const EstimateParams& p, const ScanDomain& dom);
// sup over tau of <xi>^{1-2a} F(xi, tau) on the |xi| >= 1 branch, for a list of xi.
BandCheck n2_high_rate(const EstimateParams& p, const std::vector<double>& xis, const ScanDomain& dom);

struct LowBranch {
    std::vector<double> tau;
    std::vector<double> bound;  // sup_{|xi|<1} of the reduced xi_1 integral
    double C;                   // the tau independent majorant
    double max_over_min;
};
LowBranch n2_low_branch(const EstimateParams& p, const std::vector<double>& taus);

// CSV rows in the fixed column order.
std::string sup_csv_header();
std::string sup_csv_row(const SupScanResult& r);

} // namespace lab
