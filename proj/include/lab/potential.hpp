#pragma once

#include <optional>
#include <string>

#include "lab/grid.hpp"

namespace lab {

enum class PotentialKind { zero, constant, gaussian_well, square_well, quadratic, tabulated };

struct Potential {
    PotentialKind kind = PotentialKind::zero;
    double depth = 0.0;  // gaussian_well, square_well; V = -depth * profile
    double width = 1.0;  // gaussian_well width, square_well half width
    double value = 0.0;  // constant
    RVec table;          // tabulated samples on table_grid
    Grid1D table_grid;

    // metadata
    double l2_norm = 0.0;
    double lip_norm = 0.0; // sup |V'|, may be +inf
    bool in_L2 = true;
    bool in_W1inf = true;
    bool bounded_second_derivatives = true;
    std::optional<double> rho;
    std::optional<double> decay_epsilon;

    static Potential zero();
    static Potential constant(double c);
    // V(x) = -depth * exp(-x^2 / width^2)
    static Potential gaussian_well(double depth, double width);
    static Potential square_well(double depth, double half_width);
    static Potential quadratic();
    static Potential tabulated(const Grid1D& g, RVec values);

    Potential scaled(double c) const;

    double operator()(double x) const;
    double derivative(double x) const; // throws inapplicable for kinds without a pointwise derivative
    RVec sample(const Grid1D& g) const;
    bool is_constant() const { return kind == PotentialKind::zero || kind == PotentialKind::constant; }
    double constant_value() const { return kind == PotentialKind::constant ? value : 0.0; }
    std::string describe() const;
};

} // namespace lab
