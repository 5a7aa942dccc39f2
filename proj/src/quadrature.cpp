#include "lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lab {

namespace {

double gk_piece(const RealFn& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0);
}

struct Piece {
    double a, b, value, err;
    bool operator<(const Piece& o) const { return err < o.err; }
};

Piece make_piece(const RealFn& f, double a, double b) {
    const double m = 0.5 * (a + b);
    const double whole = gk_piece(f, a, b);
    const double l = gk_piece(f, a, m), r = gk_piece(f, m, b);
    return {a, b, l + r, std::abs(l + r - whole)};
}

} // namespace

namespace {
} // namespace

QuadResult integrate_finite(const RealFn& f, double a, double b, double rel_tol) {
    QuadResult r;
    if (a == b) return r;
    // Global bisection of the piece with the largest halving change.
    std::priority_queue<Piece> heap;
    heap.push(make_piece(f, a, b));
    double total = heap.top().value, err = heap.top().err;
    for (int it = 0; it < 4000; ++it) {
        if (err <= rel_tol * std::abs(total) || err < 1e-300) break;
        const Piece p = heap.top();
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) break;
        heap.pop();
        const Piece l = make_piece(f, p.a, m), rr = make_piece(f, m, p.b);
        total += l.value + rr.value - p.value;
        err += l.err + rr.err - p.err;
        heap.push(l);
        heap.push(rr);
    }
    double sum = 0.0, esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().err;
        heap.pop();
    }
    r.value = sum;
    r.error = esum;
    r.converged = esum <= 1e-6 * std::abs(sum) || esum < 1e-300;
    return r;
}

namespace {

// exp_sinh with a shifted origin; the tail is a smooth decaying function here.
QuadResult tail_right(const RealFn& f, double a, double rel_tol) {
    QuadResult r;
    boost::math::quadrature::exp_sinh<double> es(12);
    double err = 0.0, l1 = 0.0;
    auto g = [&](double u) { return f(a + u); };
    r.value = es.integrate(g, 0.0, std::numeric_limits<double>::infinity(), rel_tol, &err, &l1);
    r.error = err;
    return r;
}

} // namespace

QuadResult integrate_line(const RealFn& f, double lo, double hi, const std::vector<Feature>& features,
                          double rel_tol) {
    std::vector<double> pts;
    double span = 1.0;
    for (const auto& ft : features) span = std::max(span, std::abs(ft.center) + ft.scale);
    span *= 4.0;
    if (std::isfinite(lo)) span = std::max(span, std::abs(lo));
    if (std::isfinite(hi)) span = std::max(span, std::abs(hi));
    for (const auto& ft : features) {
        pts.push_back(ft.center);
        for (double off = ft.scale; off <= span; off *= 2.0) {
            pts.push_back(ft.center - off);
            pts.push_back(ft.center + off);
        }
    }
    const double left = std::isfinite(lo) ? lo : -span * 2.0;
    const double right = std::isfinite(hi) ? hi : span * 2.0;
    pts.push_back(left);
    pts.push_back(right);
    std::vector<double> q;
    for (double p : pts)
        if (p >= left && p <= right) q.push_back(p);
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());

    QuadResult out;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
        const QuadResult piece = integrate_finite(f, q[i], q[i + 1], rel_tol);
        out.value += piece.value;
        out.error += piece.error;
    }
    if (!std::isfinite(hi)) {
        const QuadResult t = tail_right(f, right, rel_tol);
        out.value += t.value;
        out.error += t.error;
    }
    if (!std::isfinite(lo)) {
        const QuadResult t = tail_right([&](double x) { return f(-x); }, -left, rel_tol);
        out.value += t.value;
        out.error += t.error;
    }
    out.converged = std::isfinite(out.value) && out.error <= 1e-6 * std::abs(out.value);
    return out;
}

} // namespace lab
