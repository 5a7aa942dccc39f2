#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace lab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Periodic grid on [-L/2, L/2) with matched frequency lattice xi_k = 2*pi*k/L.
// Spectral arrays are kept in FFT storage order: index k < n/2 holds mode k,
// index k >= n/2 holds mode k - n.
struct Grid1D {
    std::size_t n = 0;
    double length = 0.0;
    double dx = 0.0;

    double x(std::size_t j) const { return -0.5 * length + dx * static_cast<double>(j); }
    long mode(std::size_t k) const {
        return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
    }
    double xi(std::size_t k) const;
    double xi_max() const; // largest |xi| on the lattice (Nyquist)
    RVec xs() const;
    RVec xis() const;
    std::size_t index_of_mode(long m) const; // storage index for signed mode m

    bool operator==(const Grid1D& o) const { return n == o.n && length == o.length; }
};

Grid1D make_grid(long n_points, double length);

struct Field {
    Grid1D grid;
    CVec values;

    Field() = default;
    Field(const Grid1D& g) : grid(g), values(g.n, cplx(0.0, 0.0)) {}
    Field(const Grid1D& g, CVec v);

    std::size_t size() const { return values.size(); }
    cplx& operator[](std::size_t j) { return values[j]; }
    const cplx& operator[](std::size_t j) const { return values[j]; }
    bool all_finite() const;
};

} // namespace lab
