#include "doctest.h"

#include <cmath>
#include <numbers>
#include <thread>

#include "lab/error.hpp"
#include "lab/fit.hpp"
#include "lab/propagators.hpp"
#include "lab/spectral.hpp"

using namespace lab;

namespace {
const cplx I(0.0, 1.0);

Field gaussian(const Grid1D& g, double w = 1.0) {
    DataSpec d;
    d.width = w;
    return generate(d, g);
}

Field smooth_random(const Grid1D& g, std::uint64_t seed) {
    DataSpec d;
    d.kind = DataKind::random_hs;
    d.s = 1.5;
    d.epsilon = 0.1;
    d.seed = seed;
    d.envelope = 1.5;
    return generate(d, g);
}
} // namespace

TEST_CASE("free propagator: identity, single mode, group law") {
    auto g = make_grid(256, 32.0);
    auto f = smooth_random(g, 1);
    CHECK(free_propagate(f, 0.0).values == f.values);
    DataSpec d;
    d.kind = DataKind::single_mode;
    d.mode = 9;
    auto m = generate(d, g);
    const double xi = g.xi(9);
    auto u = free_propagate(m, 0.7);
    for (std::size_t j = 0; j < g.n; ++j) CHECK(std::abs(u[j] - std::polar(1.0, -0.7 * xi * xi) * m[j]) < 1e-12);
    auto a = free_propagate(free_propagate(f, 0.3), 0.45), b = free_propagate(f, 0.75);
    CHECK(l2_distance(a, b) < 1e-13);
    CHECK(std::abs(l2_norm(free_propagate(f, 3.1)) - l2_norm(f)) < 1e-12);
}

TEST_CASE("free propagator matches the complex-heat-kernel Gaussian") {
    auto g = make_grid(2048, 80.0);
    const double a = 1.0, t = 0.3;
    Field f(g);
    for (std::size_t j = 0; j < g.n; ++j) f[j] = std::exp(-g.x(j) * g.x(j) / (4 * a));
    auto u = free_propagate(f, t);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        if (std::abs(x) > 10.0) continue;
        const cplx z = a + I * t;
        const cplx ex = std::sqrt(a / z) * std::exp(-x * x / (4.0 * z));
        worst = std::max(worst, std::abs(u[j] - ex));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("potential phase") {
    auto g = make_grid(128, 16.0);
    auto f = smooth_random(g, 2);
    CHECK(potential_phase(f, 0.4, Potential::zero()).values == f.values);
    CHECK(potential_phase(f, 0.0, Potential::gaussian_well(2, 1)).values == f.values);
    auto u = potential_phase(f, 0.4, Potential::constant(1.5));
    for (std::size_t j = 0; j < g.n; ++j) CHECK(std::abs(u[j] - std::polar(1.0, -0.6) * f[j]) < 1e-14);
    CHECK(std::abs(l2_norm(potential_phase(f, 2.0, Potential::gaussian_well(3, 1))) - l2_norm(f)) < 1e-13);
}

TEST_CASE("potential metadata") {
    auto gw = Potential::gaussian_well(2, 1);
    CHECK(gw.l2_norm == doctest::Approx(2 * std::sqrt(std::sqrt(std::numbers::pi / 2))));
    // numeric check of both norms on a fine grid
    auto g = make_grid(1 << 14, 40.0);
    auto v = gw.sample(g);
    double acc = 0.0, lip = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        acc += v[j] * v[j] * g.dx;
        lip = std::max(lip, std::abs(gw.derivative(g.x(j))));
    }
    CHECK(std::sqrt(acc) == doctest::Approx(gw.l2_norm).epsilon(1e-10));
    CHECK(lip == doctest::Approx(gw.lip_norm).epsilon(1e-5));
    auto q = Potential::quadratic();
    CHECK_FALSE(q.in_L2);
    CHECK(q.bounded_second_derivatives);
    auto sq = Potential::square_well(1, 0.5);
    CHECK(std::isinf(sq.lip_norm));
    CHECK_FALSE(sq.in_W1inf);
    CHECK(sq.l2_norm == doctest::Approx(1.0));
    auto tab = Potential::tabulated(make_grid(64, 8.0), RVec(64, 0.5));
    CHECK(tab.l2_norm == doctest::Approx(0.5 * std::sqrt(8.0)));
    CHECK_THROWS(Potential::tabulated(make_grid(64, 8.0), RVec(32, 0.0)));
    RVec bad(64, 0.0);
    bad[3] = NAN;
    CHECK_THROWS(Potential::tabulated(make_grid(64, 8.0), bad));
}

TEST_CASE("exact propagator: free match, unitarity, group law") {
    auto g = make_grid(256, 32.0);
    auto f = smooth_random(g, 3);
    CHECK(l2_distance(exact_propagate(f, 0.37, Potential::zero()), free_propagate(f, 0.37)) < 1e-9);
    auto V = Potential::gaussian_well(3, 1);
    auto u = exact_propagate(f, 0.8, V);
    CHECK(std::abs(l2_norm(u) - l2_norm(f)) < 1e-10 * l2_norm(f));
    auto a = exact_propagate(exact_propagate(f, 0.3, V), 0.5, V);
    CHECK(l2_distance(a, u) < 1e-9);
    CHECK_THROWS_AS(exact_propagate(Field(make_grid(4096, 32.0)), 0.1, V), LabError);
}

TEST_CASE("exact propagator: harmonic ground state") {
    auto g = make_grid(256, 20.0);
    auto V = Potential::quadratic();
    auto ep = oracle_eigenpairs(g, V);
    CHECK(ep->values[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ep->values[1] == doctest::Approx(3.0).epsilon(1e-9));
    auto f = gaussian(g);
    const double t = 0.9;
    auto u = exact_propagate(f, t, V);
    Field ex = f;
    for (auto& z : ex.values) z *= std::polar(1.0, -t);
    CHECK(l2_distance(u, ex) < 1e-8);
}

TEST_CASE("oracle cache is safe under concurrent readers") {
    auto g = make_grid(256, 24.0);
    auto V = Potential::gaussian_well(1.5, 0.7);
    auto f = smooth_random(g, 4);
    auto ref = exact_propagate(f, 0.5, V);
    std::vector<Field> out(6);
    std::vector<std::thread> th;
    for (int i = 0; i < 6; ++i) th.emplace_back([&, i] { out[i] = exact_propagate(f, 0.5, V); });
    for (auto& t : th) t.join();
    for (auto& o : out) CHECK(o.values == ref.values);
}

TEST_CASE("trotter: commuting cases") {
    auto g = make_grid(128, 16.0);
    auto f = smooth_random(g, 5);
    auto r = trotter_evolve(f, 0.6, 7, Potential::zero(), Scheme::lie);
    CHECK(l2_distance(r.final, free_propagate(f, 0.6)) < 1e-14);
    auto c = trotter_evolve(f, 0.6, 3, Potential::constant(2.0), Scheme::strang);
    Field ex = free_propagate(f, 0.6);
    for (auto& z : ex.values) z *= std::polar(1.0, -1.2);
    CHECK(l2_distance(c.final, ex) < 1e-14);
    CHECK_THROWS(trotter_evolve(f, 0.6, 0, Potential::zero(), Scheme::lie));
}

TEST_CASE("trotter: splitting orders for gaussian_well(5,1)") {
    auto g = make_grid(256, 32.0);
    auto V = Potential::gaussian_well(5, 1);
    auto f = gaussian(g);
    const double t = 0.5;
    auto ex = exact_propagate(f, t, V);
    std::vector<double> ns, el, es;
    for (long n = 8; n <= 512; n *= 2) {
        auto lie = trotter_evolve(f, t, n, V, Scheme::lie);
        auto str = trotter_evolve(f, t, n, V, Scheme::strang);
        CHECK(lie.l2_drift < 1e-10);
        CHECK(str.l2_drift < 1e-10);
        ns.push_back(static_cast<double>(n));
        el.push_back(l2_distance(lie.final, ex));
        es.push_back(l2_distance(str.final, ex));
    }
    CHECK(fit_loglog(ns, el).slope == doctest::Approx(-1.0).epsilon(0.15));
    CHECK(fit_loglog(ns, es).slope == doctest::Approx(-2.0).epsilon(0.075));
}

TEST_CASE("H^1 growth bound") {
    auto g = make_grid(512, 32.0);
    auto f = smooth_random(g, 6);
    for (const auto& r : hs_growth_check(Potential::zero(), f, {0.2, 0.7})) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : hs_growth_check(Potential::constant(0.3), f, {0.2, 0.7}))
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> ts;
    for (int i = 1; i <= 10; ++i) ts.push_back(0.1 * i);
    for (const auto& r : hs_growth_check(Potential::gaussian_well(3, 1), f, ts)) CHECK(r.within);
    CHECK_THROWS_AS(hs_growth_check(Potential::square_well(1, 1), f, ts), LabError);
}

TEST_CASE("duhamel: trivial cases") {
    auto g = make_grid(256, 32.0);
    auto f = smooth_random(g, 7);
    auto r = duhamel_solve(f, 0.3, Potential::zero());
    CHECK(r.iterations == 1);
    CHECK(l2_distance(r.final, free_propagate(f, 0.3)) < 1e-13);
    CHECK(duhamel_solve(f, 0.0, Potential::gaussian_well(2, 1)).final.values == f.values);
    CHECK_THROWS_AS(duhamel_solve(f, 0.1, Potential::quadratic()), LabError);
    CHECK_THROWS_AS(duhamel_solve(f, 0.3, Potential::gaussian_well(2, 1)), LabError); // beyond default delta
}

TEST_CASE("duhamel matches the oracle") {
    auto g = make_grid(512, 32.0);
    auto V = Potential::gaussian_well(2, 1);
    auto f = gaussian(g);
    auto r = duhamel_solve(f, 0.2, V);
    CHECK(r.quadrature_converged);
    CHECK(r.last_ratio < 1.0);
    CHECK(l2_distance(r.final, exact_propagate(f, 0.2, V)) < 1e-5);
}

TEST_CASE("duhamel contraction ratio trends") {
    auto g = make_grid(256, 32.0);
    auto f = gaussian(g);
    PicardOptions o;
    o.refine = false;
    auto ratio = [&](double depth, double t) {
        auto r = duhamel_solve(f, t, Potential::gaussian_well(depth, 1), o, 1.0);
        double m = 0.0;
        for (double q : r.ratios) m = std::max(m, q);
        return m;
    };
    const double a = ratio(1, 0.05), b = ratio(1, 0.1), c = ratio(1, 0.2);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(ratio(0.5, 0.1) < ratio(2, 0.1));
    CHECK(c < 1.0);
}

TEST_CASE("duhamel reports contraction failure") {
    auto g = make_grid(128, 32.0);
    auto f = gaussian(g);
    PicardOptions o;
    o.refine = false;
    o.max_iter = 30;
    try {
        duhamel_solve(f, 1.0, Potential::gaussian_well(40, 1), o, 1.0);
        FAIL("expected contraction failure");
    } catch (const ContractionFailure& e) {
        CHECK(e.code() == ErrorCode::contraction_failure);
        CHECK(e.last_ratio > 0.5);
    }
}

TEST_CASE("oracle coherence on 512 points") {
    auto g = make_grid(512, 32.0);
    auto V = Potential::gaussian_well(2, 1);
    auto f = gaussian(g);
    auto ex = exact_propagate(f, 0.2, V);
    auto st = trotter_evolve(f, 0.2, 4096, V, Scheme::strang).final;
    auto du = duhamel_solve(f, 0.2, V).final;
    CHECK(l2_distance(ex, st) < 1e-4);
    CHECK(l2_distance(ex, du) < 1e-4);
    CHECK(l2_distance(st, du) < 1e-4);
}
