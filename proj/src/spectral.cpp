#include "lab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lab/error.hpp"
#include "lab/fft.hpp"

namespace lab {

namespace {
// (-1)^k phase from the grid offset x_0 = -L/2.
inline double alt(std::size_t k) { return (k & 1U) ? -1.0 : 1.0; }
} // namespace

void dft_inplace(const Grid1D& g, CVec& v) {
    fft::transform(v.data(), g.n, -1);
    for (std::size_t k = 0; k < g.n; ++k) v[k] *= g.dx * alt(k);
}

void idft_inplace(const Grid1D& g, CVec& v) {
    for (std::size_t k = 0; k < g.n; ++k) v[k] *= alt(k);
    fft::transform(v.data(), g.n, +1);
    const double c = 1.0 / g.length;
    for (auto& z : v) z *= c;
}

CVec dft(const Field& f) {
    CVec v = f.values;
    dft_inplace(f.grid, v);
    return v;
}

Field idft(const Grid1D& g, const CVec& fhat) {
    if (fhat.size() != g.n) throw LabError(ErrorCode::invalid_argument, "spectrum length differs from grid size");
    CVec v = fhat;
    idft_inplace(g, v);
    return Field(g, std::move(v));
}

double l2_norm(const Field& f) {
    double acc = 0.0;
    for (const auto& z : f.values) acc += std::norm(z);
    return std::sqrt(f.grid.dx * acc);
}

double l2_distance(const Field& a, const Field& b) {
    if (!(a.grid == b.grid)) throw LabError(ErrorCode::invalid_argument, "fields on different grids");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::norm(a[j] - b[j]);
    return std::sqrt(a.grid.dx * acc);
}

double sobolev_norm_hat(const Grid1D& g, const CVec& fhat, double s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
        const double xi = g.xi(k);
        acc += std::pow(1.0 + xi * xi, s) * std::norm(fhat[k]);
    }
    return std::sqrt(acc / g.length);
}

double sobolev_norm(const Field& f, double s) { return sobolev_norm_hat(f.grid, dft(f), s); }

cplx keyed_complex_gaussian(std::uint64_t seed, long mode) {
    // splitmix64 finalizer mixes (seed, mode) into a per-mode engine seed
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(mode) * 0xD1B54A32D192ED03ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    std::mt19937_64 eng(z);
    std::normal_distribution<double> nd(0.0, std::numbers::sqrt2 / 2.0);
    const double re = nd(eng);
    const double im = nd(eng);
    return {re, im};
}

double compact_bump(double x, double center, double width) {
    const double r = (x - center) / width;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double plateau_bump(double x, double center, double inner, double outer) {
    const double r = std::abs(x - center);
    if (r <= inner) return 1.0;
    if (r >= outer) return 0.0;
    auto psi = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
    const double u = (r - inner) / (outer - inner);
    const double a = psi(1.0 - u);
    const double b = psi(u);
    return a / (a + b);
}

namespace {

void check_bandlimit(const Grid1D& g, const CVec& fhat) {
    double tot = 0.0, tail = 0.0;
    const double cut = 0.9 * g.xi_max();
    for (std::size_t k = 0; k < g.n; ++k) {
        const double e = std::norm(fhat[k]);
        tot += e;
        if (std::abs(g.xi(k)) > cut) tail += e;
    }
    if (tot > 0.0 && tail > 1e-10 * tot)
        throw LabError(ErrorCode::unrepresentable_spec, "spectral content reaches the Nyquist band");
}

} // namespace

Field generate(const DataSpec& spec, const Grid1D& g) {
    Field f(g);
    const std::size_t n = g.n;
    switch (spec.kind) {
    case DataKind::gaussian: {
        if (!(spec.width > 0.0)) throw LabError(ErrorCode::invalid_argument, "gaussian width must be positive");
        for (std::size_t j = 0; j < n; ++j) {
            const double y = (g.x(j) - spec.center) / spec.width;
            f[j] = std::exp(-0.5 * y * y);
        }
        check_bandlimit(g, dft(f));
        break;
    }
    case DataKind::single_mode: {
        const std::size_t k = g.index_of_mode(spec.mode);
        const double xi = g.xi(k);
        for (std::size_t j = 0; j < n; ++j) f[j] = std::polar(1.0, xi * g.x(j));
        break;
    }
    case DataKind::random_hs: {
        if (!(spec.epsilon >= 0.0)) throw LabError(ErrorCode::invalid_argument, "epsilon must be non-negative");
        CVec fh(n);
        const double p = -spec.s - 0.5 - spec.epsilon;
        for (std::size_t k = 0; k < n; ++k)
            fh[k] = std::pow(japanese(g.xi(k)), p) * keyed_complex_gaussian(spec.seed, g.mode(k));
        f = idft(g, fh);
        if (spec.envelope > 0.0) {
            for (std::size_t j = 0; j < n; ++j) {
                const double y = g.x(j) / spec.envelope;
                f[j] *= std::exp(-0.5 * y * y);
            }
        }
        break;
    }
    case DataKind::dk_packet: {
        if (!(spec.R > 0.0)) throw LabError(ErrorCode::invalid_argument, "dk_packet R must be positive");
        const double hi = spec.R + std::sqrt(spec.R);
        if (!(hi < g.xi_max())) throw LabError(ErrorCode::unrepresentable_spec, "R + sqrt(R) exceeds the Nyquist frequency");
        CVec fh(n, cplx(0.0, 0.0));
        for (std::size_t k = 0; k < n; ++k) {
            const double xi = g.xi(k);
            if (xi >= spec.R && xi <= hi) fh[k] = std::polar(1.0, -xi * spec.center);
        }
        f = idft(g, fh);
        break;
    }
    case DataKind::compact_bump: {
        if (!(spec.width > 0.0)) throw LabError(ErrorCode::invalid_argument, "bump width must be positive");
        if (std::abs(spec.center) + spec.width >= 0.5 * g.length)
            throw LabError(ErrorCode::invalid_argument, "bump support leaves the domain");
        for (std::size_t j = 0; j < n; ++j) f[j] = compact_bump(g.x(j), spec.center, spec.width);
        check_bandlimit(g, dft(f));
        break;
    }
    }

    if (spec.normalization != Normalization::none) {
        const double nrm = spec.normalization == Normalization::l2_unit ? l2_norm(f) : sobolev_norm(f, spec.norm_s);
        if (!(nrm > 0.0)) throw LabError(ErrorCode::invalid_argument, "cannot normalize a zero field");
        for (auto& z : f.values) z /= nrm;
    }
    if (spec.amplitude != 1.0)
        for (auto& z : f.values) z *= spec.amplitude;
    return f;
}

WrapCheck wrap_check(const Field& f, double threshold) {
    const double q = 0.25 * f.grid.length;
    double tot = 0.0, edge = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double m = std::norm(f[j]);
        tot += m;
        if (std::abs(f.grid.x(j)) >= q) edge += m;
    }
    WrapCheck w;
    w.boundary_fraction = tot > 0.0 ? edge / tot : 0.0;
    w.flagged = w.boundary_fraction >= threshold;
    return w;
}

} // namespace lab
