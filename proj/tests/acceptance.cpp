#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lab/bourgain.hpp"
#include "lab/conv_lab.hpp"
#include "lab/error.hpp"
#include "lab/fft.hpp"
#include "lab/fit.hpp"
#include "lab/format.hpp"
#include "lab/propagators.hpp"
#include "lab/qnls.hpp"
#include "lab/semiclassical.hpp"
#include "lab/spectral.hpp"
#include "lab/weights.hpp"

using namespace lab;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

Field random_field(const Grid1D& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Field f(g);
    for (auto& v : f.values) v = cplx(n(rng), n(rng));
    return f;
}

Field rough(const Grid1D& g, double s, std::uint64_t seed, double eps = 0.05, double envelope = 0.0) {
    DataSpec d;
    d.kind = DataKind::random_hs;
    d.s = s;
    d.epsilon = eps;
    d.seed = seed;
    d.envelope = envelope;
    return generate(d, g);
}

double relative_drift(const Field& u, const Field& f) { return std::abs(l2_norm(u) / l2_norm(f) - 1); }

Verdict c1_unitarity() {
    const Grid1D g = make_grid(4096, 64.0);
    const Grid1D h = make_grid(kOracleMaxPoints, 64.0);
    const Potential V = Potential::gaussian_well(2, 1);
    double rt = 0, dfree = 0, dlie = 0, dstr = 0, dex = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const Field f = random_field(g, 1000 + i);
        const Field back = idft(g, dft(f));
        rt = std::max(rt, l2_distance(back, f) / l2_norm(f));
        dfree = std::max(dfree, relative_drift(free_propagate(f, 0.3), f));
        dlie = std::max(dlie, relative_drift(trotter_evolve(f, 0.3, 64, V, Scheme::lie).final, f));
        dstr = std::max(dstr, relative_drift(trotter_evolve(f, 0.3, 64, V, Scheme::strang).final, f));
        const Field fh = random_field(h, 2000 + i);
        dex = std::max(dex, relative_drift(exact_propagate(fh, 0.3, V), fh));
    }
    const bool ok = rt <= 1e-12 && std::max({dfree, dlie, dstr, dex}) <= 1e-10;
    return {ok, "round trip " + num(rt) + "; L2 drift free " + num(dfree) + ", lie " + num(dlie) + ", strang " +
                    num(dstr) + ", exact " + num(dex) + " (exact on " + std::to_string(h.n) +
                    " points, the oracle limit)"};
}

Verdict c2_coherence() {
    const Grid1D g = make_grid(512, 32.0);
    const Potential V = Potential::gaussian_well(2, 1);
    const Field f = generate(DataSpec{}, g);
    const Field ex = exact_propagate(f, 0.2, V);
    const Field st = trotter_evolve(f, 0.2, 4096, V, Scheme::strang).final;
    const Field du = duhamel_solve(f, 0.2, V).final;
    const double a = l2_distance(ex, st), b = l2_distance(ex, du), c = l2_distance(st, du);
    return {std::max({a, b, c}) <= 1e-4, "exact-strang " + num(a) + ", exact-duhamel " + num(b) + ", strang-duhamel " + num(c)};
}

Verdict c3_orders() {
    const Grid1D g = make_grid(256, 32.0);
    const Potential V = Potential::gaussian_well(5, 1);
    const Field f = generate(DataSpec{}, g);
    const double t = 0.5;
    const Field ex = exact_propagate(f, t, V);
    std::vector<double> ns, el, es;
    for (long n = 8; n <= 512; n *= 2) {
        ns.push_back(double(n));
        el.push_back(l2_distance(trotter_evolve(f, t, n, V, Scheme::lie).final, ex));
        es.push_back(l2_distance(trotter_evolve(f, t, n, V, Scheme::strang).final, ex));
    }
    const double sl = fit_loglog(ns, el).slope, ss = fit_loglog(ns, es).slope;
    return {std::abs(sl + 1) <= 0.15 && std::abs(ss + 2) <= 0.15, "lie " + num(sl) + ", strang " + num(ss)};
}

Verdict c4_h1_growth() {
    const Grid1D g = make_grid(512, 32.0);
    const Potential V = Potential::gaussian_well(3, 1);
    std::vector<double> ts;
    for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);
    double worst = 0;
    bool ok = true;
    for (std::uint64_t i = 0; i < 10; ++i) {
        DataSpec d;
        d.kind = DataKind::random_hs;
        d.s = 1.5;
        d.epsilon = 0.1;
        d.seed = 300 + i;
        d.envelope = 1.5;
        for (const auto& r : hs_growth_check(V, generate(d, g), ts, 1.0, 0.05)) {
            ok = ok && r.within;
            worst = std::max(worst, r.ratio / r.bound);
        }
    }
    return {ok, "max ratio/bound " + num(worst) + " (allowed 1.05)"};
}

Verdict c5_linear_weight() {
    const EstimateParams p{0.25, 0.2, 0.55, 0.35};
    const auto sup = weight_sup_linear(p, {1e4, 1e8, 12});
    const auto band = linear_tail_band(p.s, p.b);
    double pos_lo = 1e300, pos_hi = 0, neg_lo = 1e300, neg_hi = 0;
    for (std::size_t i = 0; i < band.x.size(); ++i) {
        auto& lo = band.x[i] > 0 ? pos_lo : neg_lo;
        auto& hi = band.x[i] > 0 ? pos_hi : neg_hi;
        lo = std::min(lo, band.value[i]);
        hi = std::max(hi, band.value[i]);
    }
    const Grid1D g = make_grid(128, 32.0);
    const CutoffProfile eta{0.5};
    const long nt = min_time_samples(g, eta.delta);
    const double lattice = weight_sup_lattice(p, g, 4 * eta.delta, nt);
    bool cs = lattice <= sup.sup_value;
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        const Potential V = Potential::gaussian_well(0.5 + 0.25 * i, 0.5 + 0.1 * i);
        const double r = smoothing_ratio(V, windowed_free(rough(g, 0.25, 100 + i), eta, nt), p);
        worst = std::max(worst, r * r / lattice);
        cs = cs && r * r <= lattice * (1 + 1e-9);
    }
    const bool ok = !sup.diverged && band.ratio <= 5 && cs;
    return {ok, "sup " + num(sup.sup_value) + (sup.diverged ? " diverged" : " finite") + "; tail band c2/c1 " +
                    num(band.ratio) + " (tau>0: " + num(pos_hi / pos_lo) + ", tau<0: " + num(neg_hi / neg_lo) +
                    "); CS max ratio^2/S " + num(worst) + (cs ? " ok" : " violated")};
}

Verdict c6_n1() {
    const auto band = n1_rate_band(0.45, true);
    const auto bare = n1_rate_band(0.45, false);
    const auto dom = n3_domination(50.0, 500);
    return {band.ratio <= 5 && dom.violations == 0,
            "band <xi> weight " + num(band.ratio) + " (bare xi weight " + num(bare.ratio) + "); domination " +
                std::to_string(dom.violations) + " violations of " + std::to_string(dom.nodes) + ", min ratio " +
                num(dom.min_ratio)};
}

Verdict c7_n2() {
    const auto sup = weight_sup_n2({0.3, 0.2, 0.51, 0.35}, {1e2, 1e4, 8});
    std::vector<double> lm, v;
    for (double M : {1e2, 1e3, 1e4}) {
        lm.push_back(std::log(M));
        v.push_back(n2_value({0.25, 0.2, 0.51, 0.35}, 0.0, 0.0, M));
    }
    const auto fit = fit_proportional(lm, v);
    return {!sup.diverged && std::isfinite(sup.sup_value) && fit.max_rel_residual < 0.05,
            "sup at s=0.3 " + num(sup.sup_value) + (sup.diverged ? " diverged" : " finite") + "; c " + num(fit.c) +
                ", max residual " + num(fit.max_rel_residual)};
}

Verdict c8_amplitude() {
    const Grid1D g = make_grid(1024, 32.0);
    const std::vector<double> ts{0.4, 0.2, 0.1, 0.05};
    const auto w = amplitude_fit(Potential::gaussian_well(1, 2).scaled(0.5), ts, g);
    const auto z = amplitude_fit(Potential::zero(), ts, g);
    double zmax = 0, noise = 0;
    for (const auto& r : z.rows) zmax = std::max(zmax, r.sup_k_minus_1), noise = std::max(noise, r.noise);
    const bool ok = !w.inconclusive && w.slope >= 1.6 && w.slope <= 2.4 && z.inconclusive;
    return {ok, "slope " + num(w.slope) + "; V=0 sup|k-1| " + num(zmax) + " at noise " + num(noise)};
}

Verdict c9_dispersive() {
    const Grid1D g = make_grid(1024, 32.0);
    const std::vector<double> ts{0.4, 0.2, 0.1, 0.05};
    const double s0 = dispersive_fit(Potential::zero(), ts, g).slope;
    const double s1 = dispersive_fit(Potential::gaussian_well(2, 1), ts, g).slope;
    const auto conv = calibrate_mehler(g);
    Field f(g);
    for (std::size_t j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        f[j] = std::exp(-(x - 1) * (x - 1) / 2) * cplx(1.0, 0.3 * x);
    }
    double m = 0;
    for (double t : {0.2, 0.5, 1.0, 1.3, 2.0, 2.5}) {
        const Field ex = exact_propagate(f, t, Potential::quadratic());
        m = std::max(m, l2_distance(ex, mehler_propagate(f, t, conv)) / l2_norm(ex));
    }
    const bool ok = s0 >= -0.6 && s0 <= -0.4 && s1 >= -0.6 && s1 <= -0.4 && m <= 1e-3;
    return {ok, "slope V=0 " + num(s0) + ", gaussian_well(2,1) " + num(s1) + "; Mehler vs oracle " + num(m) +
                    " (time scale " + num(conv.time_scale) + ")"};
}

Verdict c10_dk() {
    const auto sw = dk_threshold_sweep({0.1, 0.25, 0.4}, {400, 1600, 6400});
    const double want[3] = {0.15, 0.0, -0.15};
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && std::abs(sw.slopes[i] - want[i]) <= 0.05;
    return {ok, "slopes " + num(sw.slopes[0]) + ", " + num(sw.slopes[1]) + ", " + num(sw.slopes[2])};
}

Verdict c11_locality() {
    const Grid1D g = make_grid(1024, 16.0);
    DataSpec d;
    d.kind = DataKind::compact_bump;
    d.width = 1.5;
    const Field f = generate(d, g);
    const auto tg = TimeGrid::dyadic(0.1, 5);
    const auto a = locality_probe(f, exact_evolver(Potential::gaussian_well(1, 1)), 3, 5, tg);
    const auto b = locality_probe(f, exact_evolver(Potential::quadratic()), 3, 5, tg);
    return {a.final_over_initial < 0.1 && b.final_over_initial < 0.1,
            "final/initial gaussian_well(1,1) " + num(a.final_over_initial) + ", x^2 " + num(b.final_over_initial)};
}

Verdict c12_localized() {
    const auto pr = localized_maximal_probe({0.15, 0.4}, 4, {400, 1600, 6400});
    std::string rho;
    for (const auto& r : pr.rows) rho += (rho.empty() ? "" : ", ") + num(r.rho);
    return {pr.increasing[0] && pr.spread[1] <= 2.0, "rho (s,R) " + rho + "; spread at 0.4 " + num(pr.spread[1])};
}

Verdict c13_qnls() {
    const std::vector<long> ns{1024, 2048, 4096};
    const double L = 64, T = 0.1, s = 0.55;
    double scale = 0;
    std::vector<double> norms, tails[3];
    for (long n : ns) {
        const Grid1D g = make_grid(n, L);
        Field f = rough(g, 0.25, 11, 0.05, 4.0);
        if (scale == 0) {
            double m = 0;
            for (auto z : f.values) m = std::max(m, std::abs(z));
            scale = 0.1 / m;
        }
        for (auto& z : f.values) z *= scale;
        norms.push_back(sobolev_norm(f, s));
        long steps = static_cast<long>(std::ceil(T * g.xi_max() * g.xi_max() / 0.5));
        steps = (steps + 7) / 8 * 8;
        int k = 0;
        for (auto nl : {Nonlinearity::N1, Nonlinearity::N2, Nonlinearity::N3})
            tails[k++].push_back(duhamel_tail_regularity(qnls_split_step(f, T, steps, nl, 8), s).back().tail);
    }
    bool ok = true;
    std::string d;
    for (int k = 0; k < 3; ++k) {
        d += std::string(k ? "; " : "") + "N" + std::to_string(k + 1) + " tail";
        for (std::size_t i = 0; i < ns.size(); ++i) {
            d += " " + num(tails[k][i]);
            ok = ok && std::isfinite(tails[k][i]);
            if (i) ok = ok && std::abs(tails[k][i] / tails[k][i - 1] - 1) <= 0.05;
        }
    }
    d += "; data norm";
    for (std::size_t i = 0; i < ns.size(); ++i) {
        d += " " + num(norms[i]);
        if (i) ok = ok && norms[i] / norms[i - 1] >= 1.1;
    }
    return {ok, d};
}

} // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"1 unitarity and round trip", c1_unitarity},
        {"2 oracle coherence", c2_coherence},
        {"3 splitting orders", c3_orders},
        {"4 H1 growth bound", c4_h1_growth},
        {"5 linear weight sup, tail band, CS majorization", c5_linear_weight},
        {"6 N1 rate band and N3 domination", c6_n1},
        {"7 N2 finite sup and log growth", c7_n2},
        {"8 amplitude rate", c8_amplitude},
        {"9 dispersive decay and Mehler", c9_dispersive},
        {"10 pointwise convergence threshold slopes", c10_dk},
        {"11 potential locality", c11_locality},
        {"12 localized maximal direction", c12_localized},
        {"13 qNLS tail stability", c13_qnls},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("%s criterion %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), sec);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
