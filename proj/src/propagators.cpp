#include "lab/propagators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <shared_mutex>

#include "lab/error.hpp"
#include "lab/fft.hpp"
#include "lab/spectral.hpp"

namespace lab {

namespace {

const cplx I(0.0, 1.0);

// Multiplier in raw FFT order folded with the 1/n of the backward transform.
CVec free_multiplier(const Grid1D& g, double t) {
    CVec m(g.n);
    const double inv = 1.0 / static_cast<double>(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double xi = g.xi(k);
        m[k] = std::polar(inv, -t * xi * xi);
    }
    return m;
}

void apply_raw(CVec& v, const CVec& mult) {
    fft::transform(v.data(), v.size(), -1);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= mult[k];
    fft::transform(v.data(), v.size(), +1);
}

CVec phase_factors(const RVec& V, double t) {
    CVec p(V.size());
    for (std::size_t j = 0; j < V.size(); ++j) p[j] = std::polar(1.0, -t * V[j]);
    return p;
}

struct CacheEntry {
    Grid1D grid;
    RVec potential;
    std::shared_ptr<const Eigenpairs> pairs;
};

struct OracleCache {
    std::shared_mutex mu;
    std::deque<CacheEntry> entries;
    static constexpr std::size_t capacity = 6;
};

OracleCache& oracle_cache() {
    static OracleCache c;
    return c;
}

std::shared_ptr<const Eigenpairs> compute_eigenpairs(const Grid1D& g, const RVec& V) {
    const std::size_t n = g.n;
    // circulant kinetic row d_m = (1/n) sum_k xi_k^2 exp(2 pi i k m / n), real by symmetry
    CVec d(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = g.xi(k);
        d[k] = xi * xi / static_cast<double>(n);
    }
    fft::transform(d.data(), n, +1);
    Eigen::MatrixXd H(n, n);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r) H(r, c) = d[(r + n - c) % n].real() + (r == c ? V[r] : 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw LabError(ErrorCode::oracle_unavailable, "symmetric eigensolver failed");
    auto ep = std::make_shared<Eigenpairs>();
    ep->grid = g;
    ep->values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    ep->vectors.assign(es.eigenvectors().data(), es.eigenvectors().data() + n * n);
    return ep;
}

} // namespace

const char* to_string(Scheme s) { return s == Scheme::lie ? "lie" : "strang"; }

Field free_propagate(const Field& f, double t) {
    if (t == 0.0) return f;
    Field u = f;
    apply_raw(u.values, free_multiplier(f.grid, t));
    return u;
}

Field potential_phase(const Field& f, double t, const Potential& V) {
    if (t == 0.0 || V.kind == PotentialKind::zero) return f;
    Field u = f;
    const RVec v = V.sample(f.grid);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, -t * v[j]);
    return u;
}

std::shared_ptr<const Eigenpairs> oracle_eigenpairs(const Grid1D& g, const Potential& V) {
    if (g.n > kOracleMaxPoints) throw LabError(ErrorCode::oracle_unavailable, "grid exceeds dense eigendecomposition limit");
    const RVec v = V.sample(g);
    auto& cache = oracle_cache();
    {
        std::shared_lock lk(cache.mu);
        for (const auto& e : cache.entries)
            if (e.grid == g && e.potential == v) return e.pairs;
    }
    auto pairs = compute_eigenpairs(g, v);
    std::unique_lock lk(cache.mu);
    for (const auto& e : cache.entries)
        if (e.grid == g && e.potential == v) return e.pairs;
    if (cache.entries.size() >= OracleCache::capacity) cache.entries.pop_front();
    cache.entries.push_back({g, v, pairs});
    return pairs;
}

Field exact_propagate(const Field& f, double t, const Potential& V) {
    if (f.grid.n > kOracleMaxPoints) throw LabError(ErrorCode::oracle_unavailable, "grid exceeds dense eigendecomposition limit");
    if (t == 0.0) return f;
    auto ep = oracle_eigenpairs(f.grid, V);
    const std::size_t n = f.grid.n;
    const RVec& Phi = ep->vectors;
    RVec re(n), im(n);
    for (std::size_t j = 0; j < n; ++j) {
        re[j] = f[j].real();
        im[j] = f[j].imag();
    }
    // c = Phi^T f
    CVec c(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double* col = Phi.data() + m * n;
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            a += col[j] * re[j];
            b += col[j] * im[j];
        }
        c[m] = cplx(a, b) * std::polar(1.0, -t * ep->values[m]);
    }
    Field u(f.grid);
    for (std::size_t m = 0; m < n; ++m) {
        const double* col = Phi.data() + m * n;
        const cplx cm = c[m];
        for (std::size_t j = 0; j < n; ++j) u[j] += col[j] * cm;
    }
    return u;
}

EvolveReport trotter_evolve(const Field& f, double t, long n, const Potential& V, Scheme scheme) {
    if (n < 1) throw LabError(ErrorCode::invalid_argument, "trotter_evolve needs n >= 1");
    EvolveReport rep;
    rep.steps = n;
    rep.method = to_string(scheme);
    const double n0 = l2_norm(f);
    if (V.is_constant()) {
        rep.final = free_propagate(f, t);
        const cplx ph = std::polar(1.0, -t * V.constant_value());
        if (V.constant_value() != 0.0)
            for (auto& z : rep.final.values) z *= ph;
    } else {
        const double h = t / static_cast<double>(n);
        const RVec v = V.sample(f.grid);
        const CVec kin = free_multiplier(f.grid, h);
        const CVec full = phase_factors(v, h);
        CVec u = f.values;
        if (scheme == Scheme::lie) {
            for (long s = 0; s < n; ++s) {
                apply_raw(u, kin);
                for (std::size_t j = 0; j < u.size(); ++j) u[j] *= full[j];
            }
        } else {
            const CVec half = phase_factors(v, 0.5 * h);
            for (std::size_t j = 0; j < u.size(); ++j) u[j] *= half[j];
            for (long s = 0; s < n; ++s) {
                apply_raw(u, kin);
                const CVec& p = s + 1 < n ? full : half;
                for (std::size_t j = 0; j < u.size(); ++j) u[j] *= p[j];
            }
        }
        rep.final = Field(f.grid, std::move(u));
    }
    rep.l2_drift = n0 > 0.0 ? std::abs(l2_norm(rep.final) - n0) / n0 : 0.0;
    return rep;
}

std::vector<GrowthRow> hs_growth_check(const Potential& V, const Field& f, const std::vector<double>& t_grid, double s,
                                       double tol) {
    if (!std::isfinite(V.lip_norm)) throw LabError(ErrorCode::inapplicable, "potential is not Lipschitz");
    const double n0 = sobolev_norm(f, s);
    if (!(n0 > 0.0)) throw LabError(ErrorCode::invalid_argument, "zero field");
    std::vector<GrowthRow> rows;
    for (double t : t_grid) {
        GrowthRow r;
        r.t = t;
        r.ratio = sobolev_norm(exact_propagate(f, t, V), s) / n0;
        r.bound = std::exp(s * std::abs(t) * V.lip_norm);
        r.within = r.ratio <= r.bound * (1.0 + tol);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct PicardPass {
    std::vector<CVec> slices; // spectral
    int iterations = 0;
    double last_ratio = 0.0;
    std::vector<double> ratios;
};

PicardPass picard_pass(const Grid1D& g, const CVec& u0hat, double t, const Forcing& F, int N, int max_iter,
                       double tol) {
    const std::size_t n = g.n;
    const double h = t / N;
    std::vector<CVec> phase(N + 1, CVec(n));
    for (int j = 0; j <= N; ++j) {
        const double tj = h * j;
        for (std::size_t k = 0; k < n; ++k) {
            const double xi = g.xi(k);
            phase[j][k] = std::polar(1.0, -tj * xi * xi);
        }
    }
    PicardPass pass;
    pass.slices.assign(N + 1, CVec(n));
    for (int j = 0; j <= N; ++j)
        for (std::size_t k = 0; k < n; ++k) pass.slices[j][k] = phase[j][k] * u0hat[k];

    std::vector<CVec> w(N + 1, CVec(n));
    CVec buf(n), forced(n), cum(n);
    double prev = -1.0;
    int growing = 0;
    for (int it = 1; it <= max_iter; ++it) {
        for (int j = 0; j <= N; ++j) {
            buf = pass.slices[j];
            idft_inplace(g, buf);
            F(buf, forced);
            dft_inplace(g, forced);
            for (std::size_t k = 0; k < n; ++k) w[j][k] = std::conj(phase[j][k]) * forced[k];
        }
        double diff = 0.0;
        std::fill(cum.begin(), cum.end(), cplx(0.0, 0.0));
        CVec even_cum = cum; // running Simpson sum at the last even node
        for (int j = 0; j <= N; ++j) {
            if (j == 0) {
                std::fill(cum.begin(), cum.end(), cplx(0.0, 0.0));
            } else if (j % 2 == 0) {
                for (std::size_t k = 0; k < n; ++k)
                    even_cum[k] += h / 3.0 * (w[j - 2][k] + 4.0 * w[j - 1][k] + w[j][k]);
                cum = even_cum;
            } else if (N >= 2) {
                const int a = j >= 2 ? j - 2 : 0;
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx piece = j >= 2 ? h * (5.0 * w[j][k] + 8.0 * w[j - 1][k] - w[a][k]) / 12.0
                                              : h * (5.0 * w[0][k] + 8.0 * w[1][k] - w[2][k]) / 12.0;
                    cum[k] = even_cum[k] + piece;
                }
            } else {
                for (std::size_t k = 0; k < n; ++k) cum[k] = 0.5 * h * (w[0][k] + w[1][k]);
            }
            double d2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const cplx nv = phase[j][k] * (u0hat[k] - I * cum[k]);
                d2 += std::norm(nv - pass.slices[j][k]);
                pass.slices[j][k] = nv;
            }
            diff = std::max(diff, std::sqrt(d2 / g.length));
        }
        pass.iterations = it;
        if (prev > 0.0) {
            pass.last_ratio = diff / prev;
            pass.ratios.push_back(pass.last_ratio);
            growing = pass.last_ratio >= 1.0 ? growing + 1 : 0;
        }
        if (!std::isfinite(diff)) throw ContractionFailure("Picard iterates became non-finite", pass.last_ratio);
        if (diff < tol) return pass;
        if (growing >= 4) throw ContractionFailure("Picard map is not contracting (delta too large?)", pass.last_ratio);
        prev = diff;
    }
    throw ContractionFailure("Picard iteration did not converge within max_iter", pass.last_ratio);
}

} // namespace

PicardResult picard_solve(const Field& u0, double t, const Forcing& F, const PicardOptions& opt) {
    if (opt.n_t < 2) throw LabError(ErrorCode::invalid_argument, "n_t must be at least 2");
    const Grid1D& g = u0.grid;
    const CVec u0hat = dft(u0);
    PicardResult res;
    if (t == 0.0) {
        res.trajectory.assign(opt.n_t + 1, u0);
        res.n_t = opt.n_t;
        return res;
    }
    int N = opt.n_t;
    PicardPass pass = picard_pass(g, u0hat, t, F, N, opt.max_iter, opt.tol);
    while (opt.refine) {
        const int N2 = 2 * N;
        if (N2 > opt.max_n_t || static_cast<double>(N2 + 1) * static_cast<double>(g.n) > 6.7e7) {
            res.quadrature_converged = false;
            break;
        }
        PicardPass finer = picard_pass(g, u0hat, t, F, N2, opt.max_iter, opt.tol);
        double d2 = 0.0;
        for (std::size_t k = 0; k < g.n; ++k) d2 += std::norm(finer.slices.back()[k] - pass.slices.back()[k]);
        res.refinement_change = std::sqrt(d2 / g.length);
        pass = std::move(finer);
        N = N2;
        if (res.refinement_change < opt.tol / 10.0) break;
    }
    res.iterations = pass.iterations;
    res.last_ratio = pass.last_ratio;
    res.ratios = pass.ratios;
    res.n_t = N;
    res.trajectory.reserve(N + 1);
    for (auto& sl : pass.slices) res.trajectory.push_back(idft(g, sl));
    res.trajectory.front() = u0;
    return res;
}

double default_delta(const Potential& V) {
    if (!(V.l2_norm > 0.0)) return 0.5;
    return 0.5 * std::min(1.0, 1.0 / V.l2_norm);
}

DuhamelResult duhamel_solve(const Field& f, double t, const Potential& V, const PicardOptions& opt, double delta) {
    if (!V.in_L2) throw LabError(ErrorCode::inapplicable, "duhamel_solve requires V in L2");
    const double d = delta > 0.0 ? delta : default_delta(V);
    if (std::abs(t) > d) throw LabError(ErrorCode::invalid_argument, "|t| exceeds the configured delta");
    DuhamelResult out;
    if (t == 0.0) {
        out.final = f;
        return out;
    }
    const RVec v = V.sample(f.grid);
    Forcing F = [&v](const CVec& u, CVec& o) {
        for (std::size_t j = 0; j < u.size(); ++j) o[j] = v[j] * u[j];
    };
    PicardResult r = picard_solve(f, t, F, opt);
    out.final = std::move(r.trajectory.back());
    out.iterations = r.iterations;
    out.last_ratio = r.last_ratio;
    out.ratios = std::move(r.ratios);
    out.n_t = r.n_t;
    out.quadrature_converged = r.quadrature_converged;
    return out;
}

} // namespace lab
