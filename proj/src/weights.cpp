#include "lab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "lab/error.hpp"
#include "lab/format.hpp"
#include "lab/parallel.hpp"

namespace lab {

namespace {

// <x>^{-p}
inline double jneg(double x, double p) { return std::pow(1.0 + x * x, -0.5 * p); }
inline double jpos(double x, double p) { return std::pow(1.0 + x * x, 0.5 * p); }

std::optional<std::string> check(bool ok, const char* what) {
    if (ok) return std::nullopt;
    return std::string(what);
}

// c + x^2 evaluated without cancellation near the root r = sqrt(-c).
struct ShiftedSquare {
    double r = 0.0, delta = 0.0;
    bool root = false;
    explicit ShiftedSquare(double c) {
        if (c < 0) {
            r = std::sqrt(-c);
            delta = std::fma(r, r, c);
            root = true;
        } else {
            delta = c;
        }
    }
    double operator()(double x) const { return root ? delta + (x - r) * (x + r) : delta + x * x; }
};

// Resonance width of <c + q u^2> near its zero, clipped to 1.
double resonance_scale(double root) { return root > 0.5 ? 1.0 / (2.0 * root) : 1.0; }

std::vector<double> log_nodes(double lo_exp, double hi_value, int per_decade) {
    std::vector<double> v;
    const double hi_exp = std::log10(hi_value);
    for (int k = static_cast<int>(std::ceil(lo_exp * per_decade));; ++k) {
        const double e = static_cast<double>(k) / per_decade;
        if (e > hi_exp + 1e-12) break;
        v.push_back(std::pow(10.0, e));
    }
    return v;
}

void sort_unique(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

void finish_doubling(SupScanResult& r) {
    const auto& d = r.domain_sups;
    bool inf = false;
    for (double v : d) inf = inf || !std::isfinite(v);
    if (inf) {
        r.diverged = true;
        r.tail_ratio = kInfinity;
        r.sup_value = kInfinity;
        return;
    }
    const double g1 = d[0] > 0 ? d[1] / d[0] : 1.0;
    const double g2 = d[1] > 0 ? d[2] / d[1] : 1.0;
    r.tail_ratio = g2;
    r.diverged = g1 > 1.05 && g2 > 1.05;
}

} // namespace

std::optional<std::string> linear_violation(const EstimateParams& p) {
    const double lo = (p.s + p.a) / 2, hi = std::min(p.s / 2 + 0.25, 0.5);
    if (auto v = check(p.s >= 0 && p.a >= 0, "s >= 0 and a >= 0")) return v;
    if (auto v = check(p.gamma >= lo, "gamma >= (s+a)/2")) return v;
    if (auto v = check(p.gamma < hi, "gamma < min(s/2+1/4, 1/2)")) return v;
    if (auto v = check(p.b > std::max(p.s / 2 + 0.25, 0.5), "b > max(s/2+1/4, 1/2)")) return v;
    if (auto v = check(p.b < 1 - p.gamma, "b < 1-gamma")) return v;
    return std::nullopt;
}

std::optional<std::string> n1_violation(const EstimateParams& p) {
    if (auto v = check(p.a >= 0 && p.a < 0.5, "a in [0, 1/2)")) return v;
    if (auto v = check(p.b > 0.5, "b > 1/2")) return v;
    if (auto v = check(p.gamma > 0 && p.gamma < 0.5, "gamma in (0, 1/2)")) return v;
    if (auto v = check(p.b < 1 - p.gamma, "b < 1-gamma")) return v;
    return std::nullopt;
}

std::optional<std::string> n2_violation(const EstimateParams& p) {
    if (auto v = check(p.s > 0.25, "s > 1/4")) return v;
    if (auto v = check(p.a >= 0 && p.a <= 0.5, "a in [0, 1/2]")) return v;
    if (auto v = check(p.b > 0.5, "b > 1/2")) return v;
    if (auto v = check(p.gamma > 0 && p.gamma < 0.5, "gamma in (0, 1/2)")) return v;
    return std::nullopt;
}

double phi_beta(double beta, double a) {
    const double ja = std::sqrt(1 + a * a);
    if (std::abs(beta - 1.0) < 1e-12) return std::log(1 + ja);
    if (beta > 1) return 1.0;
    return std::pow(ja, 1 - beta);
}

ConvolutionCheck calculus_convolution_check(double beta, double gamma, double a1, double a2) {
    if (!(beta >= gamma && gamma >= 0)) throw LabError(ErrorCode::invalid_argument, "need beta >= gamma >= 0");
    if (beta + gamma <= 1) throw LabError(ErrorCode::inapplicable, "beta + gamma <= 1: the integral diverges");
    auto f = [=](double x) { return jneg(x - a1, beta) * jneg(x - a2, gamma); };
    double X = std::max(std::abs(a1), std::abs(a2)) + 10.0;
    QuadResult core = integrate_line(f, -X, X, {{a1, 1.0}, {a2, 1.0}});
    double lhs = core.value;
    bool conv = core.converged;
    for (int it = 0; it < 2000; ++it) {
        const QuadResult l = integrate_finite(f, -2 * X, -X), r = integrate_finite(f, X, 2 * X);
        const double inc = l.value + r.value;
        lhs += inc;
        X *= 2;
        if (inc < 1e-8) break;
        if (!std::isfinite(X)) {
            conv = false;
            break;
        }
    }
    const double d = a1 - a2;
    const double rhs = jneg(d, gamma) * phi_beta(beta, d);
    return {lhs, rhs, lhs / rhs, conv};
}

ConvolutionFit convolution_fit(double beta, double gamma, const std::vector<double>& separations) {
    ConvolutionFit out{0.0, {}, {}};
    for (double d : separations) {
        const auto c = calculus_convolution_check(beta, gamma, 0.0, d);
        out.d.push_back(d);
        out.ratio.push_back(c.ratio);
        out.C = std::max(out.C, c.ratio);
    }
    return out;
}

TauProductMin tau_product_lower(double a, double b) {
    const double d = std::abs(a - b);
    auto f = [=](double t) { return std::sqrt(1 + (t - a) * (t - a)) * std::sqrt(1 + (t - b) * (t - b)) / std::sqrt(1 + d * d); };
    const double lo = std::min(a, b) - 2.0, hi = std::max(a, b) + 2.0;
    const int n = 4000;
    double best = f(lo), bt = lo;
    for (int i = 1; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        const double v = f(t);
        if (v < best) best = v, bt = t;
    }
    const double h = (hi - lo) / n;
    auto r = boost::math::tools::brent_find_minima(f, bt - h, bt + h, 52);
    if (r.second < best) best = r.second, bt = r.first;
    return {best, bt};
}

double tau_product_min_exact(double d) {
    d = std::abs(d);
    if (d <= 2) return (1 + d * d / 4) / std::sqrt(1 + d * d);
    return d / std::sqrt(1 + d * d);
}

namespace {

QuadResult jtilde_q(double tau, double s, double b) {
    const ShiftedSquare q(tau);
    auto f = [=](double x) { return jneg(x, 2 * s) * jneg(q(x), 2 * b); };
    std::vector<Feature> ft{{0.0, 1.0}};
    if (tau < 0) {
        const double r = std::sqrt(-tau);
        ft.push_back({r, resonance_scale(r)});
    }
    QuadResult r = integrate_line(f, 0.0, kInfinity, ft);
    r.value *= 2;
    return r;
}

} // namespace

double linear_Jtilde(double tau, double s, double b) { return jtilde_q(tau, s, b).value; }

double linear_I(const EstimateParams& p, double xi, double tau) {
    return jpos(xi, 2 * p.s + 2 * p.a) * jneg(tau + xi * xi, 2 * p.gamma) * linear_Jtilde(tau, p.s, p.b);
}

double linear_J(double tau, double s, double b) {
    // z = u^2 removes the endpoint singularity.
    const ShiftedSquare q(tau);
    auto f = [=](double u) { return 2 * jneg(u * u, s) * jneg(q(u), 2 * b); };
    std::vector<Feature> ft{{0.0, 1.0}};
    if (tau < 0) {
        const double r = std::sqrt(-tau);
        ft.push_back({r, resonance_scale(r)});
    }
    return integrate_line(f, 0.0, kInfinity, ft).value;
}

SupScanResult weight_sup_linear(const EstimateParams& p, const ScanDomain& dom, bool enforce) {
    if (enforce) {
        if (auto v = linear_violation(p)) throw LabError(ErrorCode::invalid_params, "inadmissible for the linear estimate: " + *v);
    }
    std::vector<double> xis{0.0};
    for (double x : log_nodes(-2, 4 * dom.xi_max, dom.per_decade)) xis.push_back(x);
    for (double x : {dom.xi_max, 2 * dom.xi_max, 4 * dom.xi_max}) xis.push_back(x);
    sort_unique(xis);
    const double tmax = 16 * dom.tau_max;
    std::vector<double> taus{0.0};
    for (double t : log_nodes(-2, tmax, dom.per_decade)) {
        taus.push_back(t);
        taus.push_back(-t);
    }
    for (double t : {dom.tau_max, 4 * dom.tau_max, tmax}) {
        taus.push_back(t);
        taus.push_back(-t);
    }
    for (double x : xis)
        for (double o : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
            const double t = -x * x + o;
            if (std::abs(t) <= tmax) taus.push_back(t);
        }
    sort_unique(taus);

    std::vector<double> jt(taus.size());
    std::vector<char> conv(taus.size(), 1);
    parallel_for(taus.size(), [&](std::size_t i) {
        const QuadResult q = jtilde_q(taus[i], p.s, p.b);
        jt[i] = q.value;
        conv[i] = q.converged;
    });

    SupScanResult r;
    r.lemma = "linear";
    r.params = p;
    r.domain = dom;
    r.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
    for (int level = 0; level < 3; ++level) {
        const double X = dom.xi_max * std::pow(2.0, level), T = dom.tau_max * std::pow(4.0, level);
        double best = 0, bx = 0, bt = 0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            if (std::abs(taus[i]) > T) continue;
            for (double x : xis) {
                if (x > X) break;
                const double v = jpos(x, 2 * p.s + 2 * p.a) * jneg(taus[i] + x * x, 2 * p.gamma) * jt[i];
                if (v > best) best = v, bx = x, bt = taus[i];
            }
        }
        r.domain_sups.push_back(best);
        if (level == 0) r.sup_value = best, r.xi_star = bx, r.tau_star = bt;
    }
    finish_doubling(r);
    return r;
}

BandCheck linear_tail_band(double s, double b, int points) {
    BandCheck out{{}, {}, kInfinity, 0.0, 0.0};
    std::vector<double> ts;
    for (int i = 0; i < points; ++i) {
        const double t = std::pow(10.0, 4.0 * i / (points - 1));
        ts.push_back(-t);
        ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    out.x = ts;
    out.value.resize(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) { out.value[i] = linear_J(ts[i], s, b) * jpos(ts[i], s + 0.5); });
    for (double v : out.value) out.c1 = std::min(out.c1, v), out.c2 = std::max(out.c2, v);
    out.ratio = out.c2 / out.c1;
    return out;
}

namespace {

QuadResult n1_R_q(const EstimateParams& p, double xi) {
    const double g = p.gamma;
    auto f = [=](double x) { return jneg(x * (x - xi), 2 * g); };
    const double sc = 1.0 / std::max(1.0, std::abs(xi));
    QuadResult q = integrate_line(f, -kInfinity, kInfinity, {{0.0, sc}, {xi, sc}, {xi / 2, 1.0}});
    q.value *= jpos(xi, 2 * p.a);
    return q;
}

} // namespace

double n1_R(const EstimateParams& p, double xi) { return n1_R_q(p, xi).value; }

double n1_I(double gamma, double xi) {
    const double c = xi * xi / 4;
    const ShiftedSquare q(-c);
    auto f = [=](double u) { return 2 * jneg(q(u), 2 * gamma); };
    const double r = std::sqrt(c);
    return integrate_line(f, 0.0, kInfinity, {{0.0, 1.0}, {r, resonance_scale(r)}}).value;
}

double n1_R_eta(const EstimateParams& p, double xi) { return jpos(xi, 2 * p.a) * n1_I(p.gamma, xi); }

double n3_R(const EstimateParams& p, double xi) {
    const double g = p.gamma;
    auto f = [=](double x) { return jneg(x * x - x * xi + xi * xi, 2 * g); };
    const QuadResult q = integrate_line(f, -kInfinity, kInfinity, {{0.0, 1.0}, {xi, 1.0}, {xi / 2, 1.0}});
    return jpos(xi, 2 * p.a) * q.value;
}

double n1_zero_mode_truncated(double gamma, double M) {
    auto f = [=](double x) { return jneg(x * x, 2 * gamma); };
    return integrate_line(f, -M, M, {{0.0, 1.0}}).value;
}

SupScanResult weight_sup_n1(const EstimateParams& p, const ScanDomain& dom, bool enforce) {
    if (enforce) {
        if (auto v = n1_violation(p)) throw LabError(ErrorCode::invalid_params, "inadmissible for N1: " + *v);
        if (!(p.gamma > 0.25 && p.gamma < 0.5)) throw LabError(ErrorCode::invalid_params, "N1 scan needs gamma in (1/4, 1/2)");
    }
    std::vector<double> xis{0.0};
    for (double x : log_nodes(-2, 4 * dom.xi_max, dom.per_decade)) xis.push_back(x);
    for (double x : {dom.xi_max, 2 * dom.xi_max, 4 * dom.xi_max}) xis.push_back(x);
    sort_unique(xis);
    std::vector<double> val(xis.size());
    std::vector<char> conv(xis.size(), 1);
    parallel_for(xis.size(), [&](std::size_t i) {
        const QuadResult q = n1_R_q(p, xis[i]);
        val[i] = q.value;
        conv[i] = q.converged;
    });
    SupScanResult r;
    r.lemma = "n1";
    r.params = p;
    r.domain = dom;
    r.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
    for (int level = 0; level < 3; ++level) {
        const double X = dom.xi_max * std::pow(2.0, level);
        double best = 0, bx = 0;
        for (std::size_t i = 0; i < xis.size() && xis[i] <= X; ++i)
            if (val[i] > best) best = val[i], bx = xis[i];
        r.domain_sups.push_back(best);
        if (level == 0) r.sup_value = best, r.xi_star = bx;
    }
    finish_doubling(r);
    return r;
}

BandCheck n1_rate_band(double gamma, bool japanese_weight, int points) {
    BandCheck out{{}, {}, kInfinity, 0.0, 0.0};
    for (int i = 0; i < points; ++i) out.x.push_back(std::pow(10.0, 2.0 * i / (points - 1)));
    out.value.resize(out.x.size());
    parallel_for(out.x.size(), [&](std::size_t i) {
        const double x = out.x[i];
        const double w = japanese_weight ? jpos(x, 4 * gamma - 1) : std::pow(x, 4 * gamma - 1);
        out.value[i] = n1_I(gamma, x) * w;
    });
    for (double v : out.value) out.c1 = std::min(out.c1, v), out.c2 = std::max(out.c2, v);
    out.ratio = out.c2 / out.c1;
    return out;
}

DominationCheck n3_domination(double half_width, int nodes_per_axis) {
    DominationCheck out{0, 0, kInfinity};
    const int n = nodes_per_axis;
    for (int i = 0; i < n; ++i) {
        const double xi = -half_width + 2 * half_width * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double x1 = -half_width + 2 * half_width * j / (n - 1);
            const double A = x1 * x1 - x1 * xi + xi * xi;
            const double B = x1 * (x1 - xi);
            const double ratio = std::sqrt((1 + A * A) / (1 + B * B));
            ++out.nodes;
            if (ratio < 1.0) ++out.violations;
            out.min_ratio = std::min(out.min_ratio, ratio);
        }
    }
    return out;
}

namespace {

QuadResult n2_inner_q(const EstimateParams& p, double xi, double sigma, double M) {
    // sigma - 2 xi x around its root x0
    const double x0 = xi != 0.0 ? sigma / (2 * xi) : 0.0;
    const double res = xi != 0.0 ? std::fma(-2 * xi, x0, sigma) : sigma;
    auto f = [=](double x) { return jneg(xi - x, 2 * p.s) * jneg(x, 2 * p.s) * jneg(res - 2 * xi * (x - x0), 2 * p.b); };
    std::vector<Feature> ft{{0.0, 1.0}, {xi, 1.0}};
    if (xi != 0.0) ft.push_back({sigma / (2 * xi), std::min(1.0, 1.0 / (2 * std::abs(xi)))});
    return integrate_line(f, -M, M, ft);
}

double n2_inner(const EstimateParams& p, double xi, double sigma, double M) { return n2_inner_q(p, xi, sigma, M).value; }

double n2_weight(const EstimateParams& p, double xi, double sigma) {
    return jpos(xi, 2 * p.s + 2 * p.a) * jneg(sigma, 2 * p.gamma);
}

} // namespace

double n2_value(const EstimateParams& p, double xi, double tau, double M) {
    const double sigma = tau + xi * xi;
    return n2_weight(p, xi, sigma) * n2_inner(p, xi, sigma, M);
}

double n2_value_direct(const EstimateParams& p, double xi, double tau) {
    const double sigma = tau + xi * xi;
    // tau_1 integral of the two modulation weights; its exact value replaces <sigma - 2 xi xi_1>^{-2b}.
    auto inner = [&](double x1) {
        const double c1 = -x1 * x1, c2 = tau - (xi - x1) * (xi - x1);
        // beyond this the separation of the two weights is huge and the integrand is below 1e-30
        if (std::abs(x1) > 1e7 * (1 + std::abs(xi) + std::sqrt(std::abs(tau)))) return 0.0;
        auto g = [=](double t1) { return jneg(t1 - c1, 2 * p.b) * jneg(t1 - c2, 2 * p.b); };
        return integrate_line(g, -kInfinity, kInfinity, {{c1, 1.0}, {c2, 1.0}}, 1e-7).value;
    };
    auto f = [&](double x1) { return jneg(xi - x1, 2 * p.s) * jneg(x1, 2 * p.s) * inner(x1); };
    std::vector<Feature> ft{{0.0, 1.0}, {xi, 1.0}};
    if (xi != 0.0) ft.push_back({sigma / (2 * xi), std::min(1.0, 1.0 / (2 * std::abs(xi)))});
    return n2_weight(p, xi, sigma) * integrate_line(f, -kInfinity, kInfinity, ft, 1e-6).value;
}

SupScanResult weight_sup_n2(const EstimateParams& p, const ScanDomain& dom) {
    if (!(p.s > 0)) throw LabError(ErrorCode::invalid_params, "N2 scan needs s > 0");
    std::vector<double> xis{0.0};
    for (double x : log_nodes(-2, 4 * dom.xi_max, dom.per_decade)) xis.push_back(x);
    for (double x : {dom.xi_max, 2 * dom.xi_max, 4 * dom.xi_max}) xis.push_back(x);
    sort_unique(xis);
    const double smax = 16 * dom.tau_max;
    std::vector<double> sig{0.0};
    for (double t : log_nodes(-2, smax, dom.per_decade)) {
        sig.push_back(t);
        sig.push_back(-t);
    }
    sort_unique(sig);
    const std::size_t nx = xis.size(), ns = sig.size();
    std::vector<double> val(nx * ns);
    std::vector<char> conv(nx * ns, 1);
    parallel_for(nx * ns, [&](std::size_t k) {
        const double x = xis[k / ns], sg = sig[k % ns];
        const QuadResult q = n2_inner_q(p, x, sg, kInfinity);
        val[k] = n2_weight(p, x, sg) * q.value;
        conv[k] = q.converged;
    });
    SupScanResult r;
    r.lemma = "n2";
    r.params = p;
    r.domain = dom;
    r.converged = std::all_of(conv.begin(), conv.end(), [](char c) { return c != 0; });
    for (int level = 0; level < 3; ++level) {
        const double X = dom.xi_max * std::pow(2.0, level), T = dom.tau_max * std::pow(4.0, level);
        double best = 0, bx = 0, bt = 0;
        for (std::size_t i = 0; i < nx && xis[i] <= X; ++i)
            for (std::size_t j = 0; j < ns; ++j) {
                const double tau = sig[j] - xis[i] * xis[i];
                if (std::abs(tau) > T) continue;
                if (val[i * ns + j] > best) best = val[i * ns + j], bx = xis[i], bt = tau;
            }
        r.domain_sups.push_back(best);
        if (level == 0) r.sup_value = best, r.xi_star = bx, r.tau_star = bt;
    }
    finish_doubling(r);
    return r;
}

BandCheck n2_high_rate(const EstimateParams& p, const std::vector<double>& xis, const ScanDomain& dom) {
    BandCheck out{xis, std::vector<double>(xis.size()), kInfinity, 0.0, 0.0};
    std::vector<double> sig{0.0};
    for (double t : log_nodes(-2, dom.tau_max, dom.per_decade)) {
        sig.push_back(t);
        sig.push_back(-t);
    }
    parallel_for(xis.size(), [&](std::size_t i) {
        double best = 0;
        for (double sg : sig) best = std::max(best, n2_weight(p, xis[i], sg) * n2_inner(p, xis[i], sg, kInfinity));
        out.value[i] = best * jpos(xis[i], 1 - 2 * p.a);
    });
    for (double v : out.value) out.c1 = std::min(out.c1, v), out.c2 = std::max(out.c2, v);
    out.ratio = out.c2 / out.c1;
    return out;
}

LowBranch n2_low_branch(const EstimateParams& p, const std::vector<double>& taus) {
    LowBranch out;
    out.tau = taus;
    out.bound.resize(taus.size());
    const double s4 = 4 * p.s;
    out.C = integrate_line([=](double x) { return jneg(x, s4); }, -kInfinity, kInfinity, {{0.0, 1.0}}).value;
    parallel_for(taus.size(), [&](std::size_t i) {
        double best = 0;
        for (int k = 0; k < 40; ++k) {
            const double xi = k / 40.0;
            const double sg = taus[i] + xi * xi;
            auto f = [=](double x) { return jneg(x, s4) * jneg(sg - 2 * xi * x, 2 * p.b); };
            std::vector<Feature> ft{{0.0, 1.0}};
            if (xi != 0.0) ft.push_back({sg / (2 * xi), std::min(1.0, 1.0 / (2 * xi))});
            best = std::max(best, integrate_line(f, -kInfinity, kInfinity, ft).value);
        }
        out.bound[i] = best;
    });
    const auto [mn, mx] = std::minmax_element(out.bound.begin(), out.bound.end());
    out.max_over_min = *mx / *mn;
    return out;
}

std::string sup_csv_header() { return "lemma,s,a,b,gamma,xi_star,tau_star,sup,diverged,tail_ratio"; }

std::string sup_csv_row(const SupScanResult& r) {
    std::ostringstream os;
    os << r.lemma << ',' << num(r.params.s) << ',' << num(r.params.a) << ',' << num(r.params.b) << ','
       << num(r.params.gamma) << ',' << num(r.xi_star) << ',' << num(r.tau_star) << ','
       << num(r.diverged ? kInfinity : r.sup_value) << ',' << (r.diverged ? "true" : "false") << ','
       << num(r.tail_ratio);
    return os.str();
}

} // namespace lab
