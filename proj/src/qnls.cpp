#include "lab/qnls.hpp"

#include <cmath>

#include "lab/error.hpp"
#include "lab/fft.hpp"
#include "lab/spectral.hpp"

namespace lab {

namespace {
const cplx I(0.0, 1.0);

inline cplx rhs(Nonlinearity nl, cplx u) { return -I * apply_nonlinearity(nl, u); }

void nonlinear_substep(Nonlinearity nl, CVec& u, double h, double time) {
    for (auto& z : u) {
        if (nl == Nonlinearity::N1) {
            const cplx den = 1.0 + I * h * z;
            if (std::abs(den) < 1e-8)
                throw LabError(ErrorCode::step_singularity, "N1 substep hits its pole; use a smaller step");
            z /= den;
        } else {
            const cplx k1 = rhs(nl, z);
            const cplx k2 = rhs(nl, z + 0.5 * h * k1);
            const cplx k3 = rhs(nl, z + 0.5 * h * k2);
            const cplx k4 = rhs(nl, z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1e100)
            throw BlowupDetected("solution left the representable range", time);
    }
}
} // namespace

const char* to_string(Nonlinearity nl) {
    switch (nl) {
    case Nonlinearity::N1: return "N1";
    case Nonlinearity::N2: return "N2";
    case Nonlinearity::N3: return "N3";
    }
    return "?";
}

cplx apply_nonlinearity(Nonlinearity nl, cplx u) {
    switch (nl) {
    case Nonlinearity::N1: return u * u;
    case Nonlinearity::N2: return u * std::conj(u);
    case Nonlinearity::N3: return std::conj(u) * std::conj(u);
    }
    return 0.0;
}

QnlsRun qnls_split_step(const Field& f, double t_final, long n_steps, Nonlinearity nl, int n_samples) {
    if (n_steps < 1) throw LabError(ErrorCode::invalid_argument, "n_steps must be >= 1");
    if (n_samples < 1 || n_steps % n_samples != 0)
        throw LabError(ErrorCode::invalid_argument, "n_steps must be a multiple of n_samples");
    const Grid1D& g = f.grid;
    const double h = t_final / static_cast<double>(n_steps);
    CVec half(g.n);
    const double inv = 1.0 / static_cast<double>(g.n);
    for (std::size_t k = 0; k < g.n; ++k) {
        const double xi = g.xi(k);
        half[k] = std::polar(inv, -0.5 * h * xi * xi);
    }
    QnlsRun run;
    run.method = "split-step";
    run.steps = n_steps;
    run.trajectory.push_back(f);
    run.times.push_back(0.0);
    const long stride = n_steps / n_samples;
    CVec u = f.values;
    for (long s = 0; s < n_steps; ++s) {
        fft::transform(u.data(), g.n, -1);
        for (std::size_t k = 0; k < g.n; ++k) u[k] *= half[k];
        fft::transform(u.data(), g.n, +1);
        nonlinear_substep(nl, u, h, h * static_cast<double>(s));
        fft::transform(u.data(), g.n, -1);
        for (std::size_t k = 0; k < g.n; ++k) u[k] *= half[k];
        fft::transform(u.data(), g.n, +1);
        if ((s + 1) % stride == 0) {
            run.trajectory.emplace_back(g, u);
            run.times.push_back(h * static_cast<double>(s + 1));
        }
    }
    return run;
}

QnlsRun qnls_duhamel(const Field& f, double t_final, Nonlinearity nl, const PicardOptions& opt, int n_samples) {
    Forcing F = [nl](const CVec& u, CVec& o) {
        for (std::size_t j = 0; j < u.size(); ++j) o[j] = apply_nonlinearity(nl, u[j]);
    };
    PicardResult r = picard_solve(f, t_final, F, opt);
    QnlsRun run;
    run.method = "picard";
    run.iterations = r.iterations;
    run.last_ratio = r.last_ratio;
    const int N = r.n_t;
    const int ns = n_samples > 0 ? n_samples : N;
    if (N % ns != 0) throw LabError(ErrorCode::invalid_argument, "n_samples must divide the quadrature grid");
    for (int j = 0; j <= N; j += N / ns) {
        run.trajectory.push_back(std::move(r.trajectory[j]));
        run.times.push_back(t_final * j / N);
    }
    return run;
}

std::vector<TailRow> duhamel_tail_regularity(const QnlsRun& run, double s) {
    if (run.trajectory.empty()) throw LabError(ErrorCode::invalid_argument, "empty run");
    const Field& u0 = run.trajectory.front();
    std::vector<TailRow> rows;
    for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
        Field lin = free_propagate(u0, run.times[i]);
        Field d = run.trajectory[i];
        for (std::size_t j = 0; j < d.size(); ++j) d[j] -= lin[j];
        rows.push_back({run.times[i], sobolev_norm(d, s)});
    }
    return rows;
}

} // namespace lab
