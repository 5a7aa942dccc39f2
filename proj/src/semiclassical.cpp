#include "lab/semiclassical.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "lab/error.hpp"
#include "lab/fft.hpp"
#include "lab/fit.hpp"
#include "lab/format.hpp"
#include "lab/parallel.hpp"
#include "lab/propagators.hpp"
#include "lab/spectral.hpp"

namespace lab {

namespace {

const double kPi = std::acos(-1.0);
// the band edge itself is allowed
const double kGuard = 0.05 - 1e-12;

double sign(double v) { return v < 0 ? -1.0 : 1.0; }

double distance_to_half_pi_lattice(double t) {
    const double q = t / (kPi / 2);
    return std::abs(q - std::round(q)) * (kPi / 2);
}

cplx free_kernel(double t, double x, double y) {
    return std::exp(cplx(0.0, (x - y) * (x - y) / (4 * t))) / std::sqrt(cplx(0.0, 4 * kPi * t));
}

} // namespace

FlowState flow_integrate(double y, double eta, double t, const Potential& V, long n_steps) {
    if (n_steps < 16) throw LabError(ErrorCode::invalid_argument, "flow_integrate needs n_steps >= 16");
    const double h = t / static_cast<double>(n_steps);
    double x = y, xi = eta;
    if (V.is_constant()) return {y + 2 * eta * t, eta, t};
    double f = V.derivative(x);
    for (long i = 0; i < n_steps; ++i) {
        const double half = xi - 0.5 * h * f;
        x += 2 * h * half;
        f = V.derivative(x);
        xi = half - 0.5 * h * f;
    }
    return {x, xi, t};
}

double flow_energy(const FlowState& s, const Potential& V) { return s.xi * s.xi + V(s.x); }

namespace {

// Trajectory and action of the path (y, eta) over [0, t].
double path_action(double y, double eta, double t, const Potential& V, long n_steps, std::vector<FlowState>* path,
                   long samples) {
    const double h = t / static_cast<double>(n_steps);
    double x = y, xi = eta;
    double f = V.is_constant() ? 0.0 : V.derivative(x);
    double lag = xi * xi - V(x), S = 0.0;
    const long every = std::max<long>(1, n_steps / std::max<long>(1, samples));
    if (path) path->push_back({x, xi, 0.0});
    for (long i = 0; i < n_steps; ++i) {
        const double half = xi - 0.5 * h * f;
        x += 2 * h * half;
        f = V.is_constant() ? 0.0 : V.derivative(x);
        xi = half - 0.5 * h * f;
        const double next = xi * xi - V(x);
        S += 0.5 * h * (lag + next);
        lag = next;
        if (path && ((i + 1) % every == 0 || i + 1 == n_steps)) path->push_back({x, xi, h * static_cast<double>(i + 1)});
    }
    return S;
}

} // namespace

ActionResult classical_action(double t, double x, double y, const Potential& V, const ActionOptions& opt) {
    if (t == 0.0) throw LabError(ErrorCode::singular_kernel, "classical action at t = 0");
    if (std::abs(t) > opt.delta_cfg)
        throw LabError(ErrorCode::no_unique_path, "t outside the small-time regime |t| <= delta_cfg");
    auto F = [&](double eta) { return flow_integrate(y, eta, t, V, opt.n_steps).x - x; };
    const double eta0 = (x - y) / (2 * t);
    const double f0 = F(eta0);
    const double eps = 1e-6 * (1 + std::abs(eta0));
    const double slope = (F(eta0 + eps) - f0) / eps;
    if (!(std::abs(slope) > 1e-8 * std::abs(t))) throw LabError(ErrorCode::no_unique_path, "boundary map is degenerate");
    double a = eta0, fa = f0, root = eta0, fr = f0;
    if (std::abs(f0) > opt.tol) {
        double b = eta0 - f0 / slope, fb = F(b);
        int grow = 0;
        while (sign(fb) == sign(fa) && std::abs(fb) > opt.tol) {
            b = a + 2 * (b - a);
            fb = F(b);
            if (++grow > 60) throw LabError(ErrorCode::no_unique_path, "no bracket for the shooting problem");
        }
        // Illinois variant of regula falsi
        root = b;
        fr = fb;
        for (int it = 0; it < 200 && std::abs(fr) > opt.tol; ++it) {
            const double c = b - fb * (b - a) / (fb - fa);
            const double fc = F(c);
            if (sign(fc) != sign(fb)) {
                a = b;
                fa = fb;
            } else {
                fa *= 0.5;
            }
            b = c;
            fb = fc;
            root = c;
            fr = fc;
        }
        if (std::abs(fr) > opt.tol) throw LabError(ErrorCode::no_unique_path, "shooting did not converge");
    }
    // A monotone boundary map has one sign change around the root.
    const double far = 10 * (1 + std::abs(root));
    if (sign(F(root + far)) != sign(slope) || sign(F(root - far)) != -sign(slope))
        throw LabError(ErrorCode::no_unique_path, "boundary map is not monotone");
    ActionResult r;
    r.eta = root;
    r.residual = std::abs(fr);
    r.S = path_action(y, root, t, V, opt.n_steps, &r.path, opt.path_samples);
    r.S0 = (x - y) * (x - y) / (4 * t);
    r.w = (r.S - r.S0) / t;
    return r;
}

double harmonic_action(double t, double x, double y) {
    return ((x * x + y * y) * std::cos(2 * t) - 2 * x * y) / (2 * std::sin(2 * t));
}

KernelBlock kernel_extract(double t, const Potential& V, const Grid1D& g, const KernelOptions& opt) {
    if (t == 0.0) throw LabError(ErrorCode::singular_kernel, "kernel extraction at t = 0");
    if (g.n > 1024) throw LabError(ErrorCode::invalid_argument, "kernel extraction needs at most 1024 points");
    const double at = std::abs(t), L = g.length;
    KernelBlock out;
    out.t = t;
    out.k1 = 1.5 * opt.D / (2 * at) + 10;
    out.near_singular = V.kind == PotentialKind::quadratic && distance_to_half_pi_lattice(t) < kGuard;
    // The oscillator refocuses, so free spreading does not limit the band there.
    out.k2 = out.near_singular ? 0.95 * g.xi_max() : std::min(0.95 * g.xi_max(), 0.9 * (L - opt.D) / (2 * at));
    if (out.near_singular) out.k1 = std::min(out.k1, 0.5 * out.k2);
    if (out.k2 <= out.k1 + 5) throw LabError(ErrorCode::inapplicable, "grid too coarse to resolve the kernel at this t");

    const long n = static_cast<long>(g.n);
    const long mid = n / 2;
    for (long j = mid; g.x(j) >= -opt.D / 2 - 1e-12 && j >= 0; j -= opt.stride) out.index.insert(out.index.begin(), j);
    for (long j = mid + opt.stride; j < n && g.x(j) <= opt.D / 2 + 1e-12; j += opt.stride) out.index.push_back(j);
    const long nb = static_cast<long>(out.index.size());

    // Flat-top erf window: an approximate identity exact below k1.
    const double kmid = 0.5 * (out.k1 + out.k2), kw = (out.k2 - out.k1) / 8;
    CVec w(n);
    for (long k = 0; k < n; ++k) w[k] = 0.5 * (1 - std::erf((std::abs(g.xi(k)) - kmid) / kw));
    fft::transform(w.data(), n, +1);
    Eigen::MatrixXd Wm(n, nb);
    for (long c = 0; c < nb; ++c)
        for (long i = 0; i < n; ++i) Wm(i, c) = w[((i - out.index[c]) % n + n) % n].real() / L;

    const auto eig = oracle_eigenpairs(g, V);
    Eigen::Map<const Eigen::MatrixXd> phi(eig->vectors.data(), n, n);
    const Eigen::MatrixXd C = phi.transpose() * Wm;
    Eigen::MatrixXd Zr(n, nb), Zi(n, nb);
    for (long m = 0; m < n; ++m) {
        const double ph = -t * eig->values[m];
        Zr.row(m) = std::cos(ph) * C.row(m);
        Zi.row(m) = std::sin(ph) * C.row(m);
    }
    Eigen::MatrixXd rows(nb, n);
    for (long r = 0; r < nb; ++r) rows.row(r) = phi.row(out.index[r]);
    const Eigen::MatrixXd Kr = rows * Zr, Ki = rows * Zi;
    out.samples.reserve(nb * nb);
    for (long r = 0; r < nb; ++r)
        for (long c = 0; c < nb; ++c)
            out.samples.push_back({t, g.x(out.index[r]), g.x(out.index[c]), cplx(Kr(r, c), Ki(r, c)), cplx(0.0)});
    return out;
}

void amplitude_fill(KernelBlock& b, const Potential& V, const ActionOptions& opt) {
    const cplx root = std::sqrt(cplx(0.0, 4 * kPi * b.t));
    parallel_for(b.samples.size(), [&](std::size_t i) {
        auto& s = b.samples[i];
        const double S = classical_action(b.t, s.x, s.y, V, opt).S;
        s.k_amplitude = s.K * root * std::exp(cplx(0.0, -S));
    });
}

double free_kernel_error(const KernelBlock& b) {
    double e = 0.0;
    for (const auto& s : b.samples) {
        const cplx k0 = free_kernel(b.t, s.x, s.y);
        e = std::max(e, std::abs(s.K - k0) / std::abs(k0));
    }
    return e;
}

AmplitudeFit amplitude_fit(const Potential& V, const std::vector<double>& ts, const Grid1D& g,
                           const KernelOptions& opt) {
    AmplitudeFit out;
    std::vector<double> tv, sv;
    for (double t : ts) {
        KernelBlock b = kernel_extract(t, V, g, opt);
        amplitude_fill(b, V);
        const KernelBlock b0 = kernel_extract(t, Potential::zero(), g, opt);
        double sup = 0, noise = 0, supK = 0;
        for (const auto& s : b.samples) {
            sup = std::max(sup, std::abs(s.k_amplitude - 1.0));
            supK = std::max(supK, std::abs(s.K));
        }
        for (const auto& s : b0.samples) {
            const cplx k0 = s.K / free_kernel(t, s.x, s.y);
            noise = std::max(noise, std::abs(k0 - 1.0));
        }
        out.rows.push_back({t, sup, noise, supK});
        if (sup < 5 * noise) out.inconclusive = true;
        tv.push_back(t);
        sv.push_back(std::max(sup, 1e-300));
    }
    if (tv.size() >= 2) out.slope = fit_loglog(tv, sv).slope;
    return out;
}

DispersiveFit dispersive_fit(const Potential& V, const std::vector<double>& ts, const Grid1D& g,
                             const KernelOptions& opt) {
    DispersiveFit out;
    std::vector<double> tv, kv;
    for (double t : ts) {
        const KernelBlock b = kernel_extract(t, V, g, opt);
        double sup = 0;
        for (const auto& s : b.samples) sup = std::max(sup, std::abs(s.K));
        out.rows.push_back({t, sup});
        tv.push_back(std::abs(t));
        kv.push_back(sup);
    }
    if (tv.size() >= 2) out.slope = fit_loglog(tv, kv).slope;
    return out;
}

cplx mehler_kernel(double t, double x, double y) {
    const double s = std::sin(2 * t), c = std::cos(2 * t);
    const double m = std::floor(2 * t / kPi);
    const cplx pref = std::pow(2 * kPi * std::abs(s), -0.5) * std::exp(cplx(0.0, -kPi / 4 - kPi * m / 2));
    return pref * std::exp(cplx(0.0, ((x * x + y * y) * c - 2 * x * y) / (2 * s)));
}

namespace {

Field mehler_apply(const Field& f, double t) {
    const Grid1D& g = f.grid;
    Field out(g);
    parallel_for(g.n, [&](std::size_t i) {
        cplx acc = 0.0;
        const double x = g.x(i);
        for (std::size_t j = 0; j < g.n; ++j) acc += mehler_kernel(t, x, g.x(j)) * f.values[j];
        out.values[i] = acc * g.dx;
    });
    return out;
}

} // namespace

MehlerConvention calibrate_mehler(const Grid1D& g, double t_probe) {
    Field f(g);
    for (std::size_t j = 0; j < g.n; ++j) f.values[j] = std::exp(-0.5 * g.x(j) * g.x(j));
    const Field ref = exact_propagate(f, t_probe, Potential::quadratic());
    const double rn = l2_norm(ref);
    MehlerConvention conv;
    conv.candidates = {1.0, 2.0, 0.5};
    double best = 1e300;
    for (double c : conv.candidates) {
        const double tc = c * t_probe;
        double err = 1e300;
        if (distance_to_half_pi_lattice(tc) >= kGuard) err = l2_distance(mehler_apply(f, tc), ref) / rn;
        conv.errors.push_back(err);
        if (err < best) best = err, conv.time_scale = c;
    }
    conv.ground_error = best;
    return conv;
}

Field mehler_propagate(const Field& f, double t, const MehlerConvention& conv) {
    const double tc = conv.time_scale * t;
    if (distance_to_half_pi_lattice(tc) < kGuard)
        throw LabError(ErrorCode::near_singular_time, "Mehler kernel is singular at t in (pi/2)Z");
    return mehler_apply(f, tc);
}

LipschitzProbe action_lipschitz(const Potential& V, const std::vector<std::pair<double, double>>& xy,
                                const std::vector<double>& ts, const ActionOptions& opt) {
    LipschitzProbe out{0.0, ts};
    for (const auto& [x, y] : xy) {
        double prev = classical_action(ts[0], x, y, V, opt).S;
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const double cur = classical_action(ts[i], x, y, V, opt).S;
            out.C = std::max(out.C, std::abs(cur - prev) / std::abs(ts[i] - ts[i - 1]));
            prev = cur;
        }
    }
    return out;
}

std::string amplitude_csv(const AmplitudeFit& fit) {
    std::ostringstream os;
    os << "t,sup_k_minus_1,noise,sup_K\n";
    for (const auto& r : fit.rows) os << num(r.t) << ',' << num(r.sup_k_minus_1) << ',' << num(r.noise) << ',' << num(r.sup_K) << '\n';
    return os.str();
}

std::string dispersive_csv(const DispersiveFit& fit) {
    std::ostringstream os;
    os << "t,sup_K\n";
    for (const auto& r : fit.rows) os << num(r.t) << ',' << num(r.sup_K) << '\n';
    return os.str();
}

} // namespace lab
