#include "doctest.h"

#include <cmath>
#include <numbers>

#include "lab/error.hpp"
#include "lab/fit.hpp"
#include "lab/spectral.hpp"

using namespace lab;

namespace {
constexpr double pi = std::numbers::pi;

Field random_field(const Grid1D& g, std::uint64_t seed) {
    DataSpec d;
    d.kind = DataKind::random_hs;
    d.s = 0.0;
    d.epsilon = 0.0;
    d.seed = seed;
    return generate(d, g);
}
} // namespace

TEST_CASE("make_grid spacing and lattice") {
    auto g = make_grid(16, 16.0);
    CHECK(g.dx == 1.0);
    CHECK(g.xi(1) == doctest::Approx(2 * pi / 16));
    CHECK(g.mode(8) == -8);
    CHECK(g.xi(8) == doctest::Approx(-pi));
    CHECK(make_grid(1024, 64.0).dx == 0.0625);
    auto g2 = make_grid(1 << 12, 3.7);
    CHECK(std::abs(g2.dx * g2.n - g2.length) <= std::nextafter(g2.length, 10.0) - g2.length);
    CHECK_THROWS_AS(make_grid(15, 10.0), LabError);
    CHECK_THROWS_AS(make_grid(16, 0.0), LabError);
    CHECK_THROWS_AS(make_grid(8, 1.0), LabError);
}

TEST_CASE("lattice symmetric except Nyquist") {
    auto g = make_grid(64, 10.0);
    for (long m = 1; m < 32; ++m) CHECK(g.xi(g.index_of_mode(m)) == doctest::Approx(-g.xi(g.index_of_mode(-m))));
    CHECK_THROWS(g.index_of_mode(32));
}

TEST_CASE("dft of zero and of a lattice mode") {
    auto g = make_grid(128, 20.0);
    Field z(g);
    for (auto v : dft(z)) CHECK(std::abs(v) == 0.0);
    DataSpec d;
    d.kind = DataKind::single_mode;
    d.mode = 5;
    auto f = generate(d, g);
    auto fh = dft(f);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double expect = g.mode(k) == 5 ? g.length : 0.0;
        CHECK(std::abs(fh[k] - expect) < 1e-11);
    }
}

TEST_CASE("dft of a Gaussian matches the continuum transform") {
    auto g = make_grid(4096, 80.0);
    DataSpec d; // exp(-x^2/2)
    auto fh = dft(generate(d, g));
    double worst = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
        const double xi = g.xi(k);
        if (std::abs(xi) > 10.0) continue;
        worst = std::max(worst, std::abs(fh[k] - std::sqrt(2 * pi) * std::exp(-0.5 * xi * xi)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("round trip and Plancherel on random fields") {
    auto g = make_grid(4096, 64.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto f = random_field(g, s);
        auto back = idft(g, dft(f));
        CHECK(l2_distance(back, f) <= 1e-12 * l2_norm(f));
        CHECK(std::abs(sobolev_norm(f, 0.0) - l2_norm(f)) <= 1e-12 * l2_norm(f));
    }
}

TEST_CASE("sobolev norm examples") {
    auto g = make_grid(256, 32.0);
    CHECK(sobolev_norm(Field(g), 1.3) == 0.0);
    DataSpec d;
    d.kind = DataKind::single_mode;
    d.mode = -7;
    auto f = generate(d, g);
    const double xi = 2 * pi * -7 / 32.0;
    for (double s : {-1.0, 0.0, 0.5, 2.0})
        CHECK(sobolev_norm(f, s) == doctest::Approx(std::sqrt(32.0) * std::pow(1 + xi * xi, s / 2)).epsilon(1e-12));
    auto gg = make_grid(4096, 80.0);
    CHECK(std::abs(sobolev_norm(generate(DataSpec{}, gg), 0.0) - std::pow(pi, 0.25)) < 1e-8);
}

TEST_CASE("sobolev norm monotone in s") {
    auto g = make_grid(512, 32.0);
    for (std::uint64_t seed = 1; seed < 6; ++seed) {
        auto f = random_field(g, seed);
        double prev = sobolev_norm(f, -1.0);
        for (double s = -0.75; s <= 3.0; s += 0.25) {
            const double v = sobolev_norm(f, s);
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("generate single_mode l2_unit") {
    auto g = make_grid(64, 8.0);
    DataSpec d;
    d.kind = DataKind::single_mode;
    d.mode = 3;
    d.normalization = Normalization::l2_unit;
    auto f = generate(d, g);
    CHECK(l2_norm(f) == doctest::Approx(1.0).epsilon(1e-14));
    int nonzero = 0;
    for (auto v : dft(f)) nonzero += std::abs(v) > 1e-10;
    CHECK(nonzero == 1);
}

TEST_CASE("dk_packet norm: lattice identity and continuum value") {
    auto g = make_grid(1 << 16, 256.0);
    DataSpec d;
    d.kind = DataKind::dk_packet;
    d.R = 400.0;
    auto f = generate(d, g);
    int count = 0;
    for (std::size_t k = 0; k < g.n; ++k) count += g.xi(k) >= 400.0 && g.xi(k) <= 420.0;
    const double n2 = l2_norm(f) * l2_norm(f);
    CHECK(n2 == doctest::Approx(count / g.length).epsilon(1e-12));
    // the sharp indicator is resolved up to one lattice cell of width 2 pi / L
    CHECK(std::abs(n2 - 20.0 / (2 * pi)) <= 1.0 / g.length);
    CHECK(l2_norm(f) == doctest::Approx(1.784).epsilon(2e-3));
}

TEST_CASE("dk_packet beyond Nyquist is unrepresentable") {
    auto g = make_grid(1024, 16.0);
    DataSpec d;
    d.kind = DataKind::dk_packet;
    d.R = 190.0;
    try {
        generate(d, g);
        FAIL("expected error");
    } catch (const LabError& e) {
        CHECK(e.code() == ErrorCode::unrepresentable_spec);
    }
}

TEST_CASE("narrow gaussian on a coarse grid is unrepresentable") {
    auto g = make_grid(32, 32.0);
    DataSpec d;
    d.width = 0.2;
    CHECK_THROWS_AS(generate(d, g), LabError);
}

TEST_CASE("random_hs regularity law under refinement") {
    std::vector<double> ns, low, high;
    for (int p = 10; p <= 13; ++p) {
        auto g = make_grid(1L << p, 64.0);
        DataSpec d;
        d.kind = DataKind::random_hs;
        d.s = 0.25;
        d.epsilon = 0.05;
        d.seed = 7;
        auto f = generate(d, g);
        ns.push_back(static_cast<double>(g.n));
        low.push_back(sobolev_norm(f, 0.25));
        high.push_back(sobolev_norm(f, 0.5));
    }
    // H^{0.5} norm keeps growing; predicted exponent of |f|^2 in n is 2(s' - s - eps) = 0.4
    auto fit = fit_loglog(ns, high);
    CHECK(fit.slope > 0.12);
    for (std::size_t i = 1; i < high.size(); ++i) CHECK(high[i] > 1.05 * high[i - 1]);
    // H^{0.25} increments shrink: finite limit
    const double d1 = low[1] * low[1] - low[0] * low[0];
    const double d2 = low[2] * low[2] - low[1] * low[1];
    const double d3 = low[3] * low[3] - low[2] * low[2];
    CHECK(d2 < d1);
    CHECK(d3 < d2);
    CHECK(fit_loglog(ns, low).slope < fit.slope / 2);
}

TEST_CASE("generation is reproducible and grid-consistent") {
    auto g = make_grid(2048, 40.0);
    DataSpec d;
    d.kind = DataKind::random_hs;
    d.seed = 99;
    d.envelope = 3.0;
    auto a = generate(d, g), b = generate(d, g);
    CHECK(a.values == b.values);
    // keyed draws are attached to lattice modes, not storage slots
    auto g2 = make_grid(4096, 40.0);
    d.envelope = 0.0;
    auto h1 = dft(generate(d, g)), h2 = dft(generate(d, g2));
    CHECK(std::abs(h1[g.index_of_mode(17)] - h2[g2.index_of_mode(17)]) < 1e-12);
    CHECK(std::abs(h1[g.index_of_mode(-301)] - h2[g2.index_of_mode(-301)]) < 1e-12);
}

TEST_CASE("keyed gaussian has unit variance") {
    double acc = 0.0, mean_re = 0.0;
    const int N = 20000;
    for (int k = 0; k < N; ++k) {
        auto z = keyed_complex_gaussian(3, k - N / 2);
        acc += std::norm(z);
        mean_re += z.real();
    }
    CHECK(acc / N == doctest::Approx(1.0).epsilon(0.03));
    CHECK(std::abs(mean_re / N) < 0.02);
}

TEST_CASE("wrap-around check") {
    auto g = make_grid(1024, 40.0);
    DataSpec d;
    d.width = 1.0;
    CHECK_FALSE(wrap_check(generate(d, g)).flagged);
    d.width = 6.0;
    auto w = wrap_check(generate(d, g));
    CHECK(w.flagged);
    CHECK(w.boundary_fraction > 1e-6);
}

TEST_CASE("bumps") {
    CHECK(compact_bump(0.0, 0.0, 1.0) == 1.0);
    CHECK(compact_bump(1.0, 0.0, 1.0) == 0.0);
    CHECK(plateau_bump(0.3, 0.0, 0.5, 1.0) == 1.0);
    CHECK(plateau_bump(1.2, 0.0, 0.5, 1.0) == 0.0);
    CHECK(plateau_bump(0.75, 0.0, 0.5, 1.0) == doctest::Approx(0.5));
    double prev = 1.0;
    for (double x = 0.5; x <= 1.0; x += 0.01) {
        const double v = plateau_bump(x, 0.0, 0.5, 1.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}
