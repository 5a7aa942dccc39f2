#include "lab/bourgain.hpp"

#include <cmath>

#include "lab/error.hpp"
#include "lab/fft.hpp"
#include "lab/fit.hpp"
#include "lab/propagators.hpp"
#include "lab/spectral.hpp"

namespace lab {

namespace {

const double kTwoPi = 2.0 * std::acos(-1.0);

inline double jpow(double x, double p) { return std::pow(1.0 + x * x, 0.5 * p); }

bool is_pow2(long n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

SpacetimeField::SpacetimeField(const Grid1D& g, double t0_, double t1_, long n_t_)
    : grid(g), t0(t0_), t1(t1_), n_t(n_t_) {
    if (!is_pow2(n_t) || !(t1 > t0)) throw LabError(ErrorCode::invalid_argument, "time window needs t1 > t0 and n_t a power of two");
    values.assign(static_cast<std::size_t>(n_t * g.n), cplx(0.0));
}

double SpacetimeField::tau(long m) const {
    const long mm = m < n_t / 2 ? m : m - n_t;
    return kTwoPi * static_cast<double>(mm) / (t1 - t0);
}

bool SpacetimeField::all_finite() const {
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double CutoffProfile::operator()(double t) const { return plateau_bump(t / delta, 0.0, 1.0, 2.0); }

double xsb_norm(const SpacetimeField& u, const XsbParams& p, Dispersion d) {
    const long n = u.grid.n, nt = u.n_t;
    CVec buf = u.values;
    fft::transform2d(buf.data(), nt, n, -1);
    const double T = u.t1 - u.t0, L = u.grid.length;
    const double scale = u.dt() * u.grid.dx;
    const double sgn = d == Dispersion::plus ? 1.0 : -1.0;
    std::vector<double> wx(n);
    for (long k = 0; k < n; ++k) wx[k] = jpow(u.grid.xi(k), 2 * p.s);
    double acc = 0.0;
    for (long m = 0; m < nt; ++m) {
        const double tau = u.tau(m);
        const cplx* r = buf.data() + m * n;
        for (long k = 0; k < n; ++k) {
            const double xi = u.grid.xi(k);
            acc += wx[k] * jpow(tau + sgn * xi * xi, 2 * p.b) * std::norm(r[k]);
        }
    }
    return std::sqrt(acc / (L * T)) * scale;
}

SpacetimeField windowed_field(const Grid1D& g, const SliceSource& source, const CutoffProfile& eta, long n_t) {
    SpacetimeField u(g, -2 * eta.delta, 2 * eta.delta, n_t);
    for (long m = 0; m < n_t; ++m) {
        const double t = u.t(m), w = eta(t);
        if (w == 0.0) continue;
        const Field f = source(t);
        for (long j = 0; j < static_cast<long>(g.n); ++j) u.row(m)[j] = w * f.values[j];
    }
    return u;
}

SpacetimeField windowed_free(const Field& f, const CutoffProfile& eta, long n_t) {
    const CVec fh = dft(f);
    const Grid1D g = f.grid;
    return windowed_field(
        g,
        [&](double t) {
            CVec h(fh.size());
            for (long k = 0; k < static_cast<long>(g.n); ++k) {
                const double xi = g.xi(k);
                h[k] = fh[k] * std::exp(cplx(0.0, -xi * xi * t));
            }
            return idft(g, h);
        },
        eta, n_t);
}

long min_time_samples(const Grid1D& g, double delta) {
    // pi n_t / T must exceed xi_max^2 plus the bump's spectral reach.
    const double T = 4 * delta, xm = g.xi_max();
    const double need = T * (xm * xm + 40.0 / delta) / std::acos(-1.0);
    long n = 256;
    while (n < need) n *= 2;
    return n;
}

double linear_estimate_ratio(const Field& f, const XsbParams& p, const CutoffProfile& eta, long n_t) {
    if (!(p.b > 0.5 && p.b <= 1.0)) throw LabError(ErrorCode::invalid_params, "linear estimate needs b in (1/2, 1]");
    const double fn = sobolev_norm(f, p.s);
    if (fn == 0.0) throw LabError(ErrorCode::undefined_ratio, "zero datum");
    return xsb_norm(windowed_free(f, eta, n_t), p) / fn;
}

double potential_linear_ratio(const Field& f, const Potential& V, const XsbParams& p, const CutoffProfile& eta,
                              long n_t) {
    const double fn = sobolev_norm(f, p.s);
    if (fn == 0.0) throw LabError(ErrorCode::undefined_ratio, "zero datum");
    const auto u = windowed_field(f.grid, [&](double t) { return exact_propagate(f, t, V); }, eta, n_t);
    return xsb_norm(u, p) / fn;
}

DeltaGain delta_gain_ratio(const Grid1D& g, const SliceSource& source, double s, double b, double b_prime,
                           const std::vector<double>& deltas, long n_t) {
    if (!(-0.5 < b_prime && b_prime <= b && b < 0.5))
        throw LabError(ErrorCode::invalid_params, "delta gain needs -1/2 < b' <= b < 1/2");
    DeltaGain out{{}, 0.0};
    std::vector<double> ds, rs;
    for (double d : deltas) {
        const auto u = windowed_field(g, source, CutoffProfile{d}, n_t);
        const double den = xsb_norm(u, {s, b});
        if (den == 0.0) throw LabError(ErrorCode::undefined_ratio, "zero field in the window");
        const double r = xsb_norm(u, {s, b_prime}) / den;
        out.rows.push_back({d, r});
        ds.push_back(d);
        rs.push_back(r);
    }
    out.slope = ds.size() >= 2 ? fit_loglog(ds, rs).slope : 0.0;
    return out;
}

double smoothing_ratio(const Potential& V, const SpacetimeField& u, const EstimateParams& p, bool enforce) {
    if (enforce) {
        if (auto v = linear_violation(p)) throw LabError(ErrorCode::invalid_params, "inadmissible parameters: " + *v);
    }
    const Grid1D& g = u.grid;
    const RVec vs = V.sample(g);
    double v2 = 0.0;
    for (double v : vs) v2 += v * v;
    const double vn = std::sqrt(v2 * g.dx);
    const double un = xsb_norm(u, {p.s, p.b});
    if (vn == 0.0) return 0.0;
    if (un == 0.0) throw LabError(ErrorCode::undefined_ratio, "zero field");
    SpacetimeField w = u;
    for (long m = 0; m < u.n_t; ++m)
        for (long j = 0; j < static_cast<long>(g.n); ++j) w.row(m)[j] *= vs[j];
    return xsb_norm(w, {p.s + p.a, -p.gamma}) / (vn * un);
}

double weight_sup_lattice(const EstimateParams& p, const Grid1D& g, double window, long n_t) {
    const double L = g.length;
    double best = 0.0;
    std::vector<double> w1(g.n);
    for (long k = 0; k < static_cast<long>(g.n); ++k) w1[k] = jpow(g.xi(k), -2 * p.s);
    for (long m = 0; m < n_t; ++m) {
        const long mm = m < n_t / 2 ? m : m - n_t;
        const double tau = kTwoPi * static_cast<double>(mm) / window;
        double inner = 0.0;
        for (long k = 0; k < static_cast<long>(g.n); ++k) {
            const double xi = g.xi(k);
            inner += w1[k] * jpow(tau + xi * xi, -2 * p.b);
        }
        inner /= L;
        for (long k = 0; k < static_cast<long>(g.n); ++k) {
            const double xi = g.xi(k);
            best = std::max(best, jpow(xi, 2 * p.s + 2 * p.a) * jpow(tau + xi * xi, -2 * p.gamma) * inner);
        }
    }
    return best;
}

} // namespace lab
