#include "lab/conv_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lab/error.hpp"
#include "lab/fit.hpp"
#include "lab/fft.hpp"
#include "lab/format.hpp"
#include "lab/parallel.hpp"
#include "lab/propagators.hpp"
#include "lab/spectral.hpp"

namespace lab {

namespace {

// Pointwise max over count items; each worker keeps its own accumulator.
template <class F>
RVec chunked_max(std::size_t count, std::size_t width, F&& fill) {
    const std::size_t nc = std::max<std::size_t>(1, std::min<std::size_t>(threads(), count));
    std::vector<RVec> acc(nc, RVec(width, 0.0));
    const std::size_t chunk = (count + nc - 1) / nc;
    parallel_for(nc, [&](std::size_t c) {
        for (std::size_t i = c * chunk; i < std::min(count, (c + 1) * chunk); ++i) fill(i, acc[c]);
    });
    for (std::size_t c = 1; c < nc; ++c)
        for (std::size_t j = 0; j < width; ++j) acc[0][j] = std::max(acc[0][j], acc[c][j]);
    return acc[0];
}

void check_window(const Grid1D& g, double lo, double hi, const char* what) {
    if (!(lo < hi) || lo < -0.5 * g.length || hi > 0.5 * g.length)
        throw LabError(ErrorCode::invalid_argument, std::string(what) + " must be a nonempty interval inside the domain");
}

std::vector<std::size_t> window_indices(const Grid1D& g, double lo, double hi) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < g.n; ++j)
        if (g.x(j) >= lo && g.x(j) <= hi) idx.push_back(j);
    return idx;
}

} // namespace

TimeGrid TimeGrid::dyadic(double t_max, long n_scales) {
    if (!(t_max > 0.0 && t_max <= 1.0) || n_scales < 1)
        throw LabError(ErrorCode::invalid_argument, "dyadic time grid needs t_max in (0, 1] and n_scales >= 1");
    return {Kind::dyadic, t_max, n_scales};
}

TimeGrid TimeGrid::uniform(double t_max, long n) {
    if (!(t_max > 0.0 && t_max <= 1.0) || n < 1)
        throw LabError(ErrorCode::invalid_argument, "uniform time grid needs t_max in (0, 1] and n >= 1");
    return {Kind::uniform, t_max, n};
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(n);
    for (long k = 0; k < n; ++k)
        t[k] = kind == Kind::dyadic ? std::ldexp(t_max, -static_cast<int>(k)) : t_max * (k + 1) / double(n);
    return t;
}

Evolver free_evolver() {
    return {"free", [](const Field& f, double t) { return free_propagate(f, t); }};
}

Evolver exact_evolver(const Potential& V) {
    return {"exact", [V](const Field& f, double t) { return exact_propagate(f, t, V); }};
}

Evolver trotter_evolver(const Potential& V, double max_step) {
    if (!(max_step > 0)) throw LabError(ErrorCode::invalid_argument, "max_step must be positive");
    return {"trotter", [V, max_step](const Field& f, double t) {
                const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(t) / max_step)));
                return trotter_evolve(f, t, n, V, Scheme::strang).final;
            }};
}

Evolver qnls_evolver(Nonlinearity nl, double max_step) {
    if (!(max_step > 0)) throw LabError(ErrorCode::invalid_argument, "max_step must be positive");
    return {std::string("qnls_") + to_string(nl), [nl, max_step](const Field& f, double t) {
                const long n = std::max(1L, static_cast<long>(std::ceil(t / max_step)));
                return qnls_split_step(f, t, n, nl, 1).trajectory.back();
            }};
}

double MaximalReport::divergence_measure(double eps) const {
    const auto c = std::count_if(max_dev.begin(), max_dev.end(), [eps](double m) { return m > eps; });
    return grid.dx * static_cast<double>(c);
}

std::vector<double> MaximalReport::divergence_measures(const std::vector<double>& eps) const {
    std::vector<double> out;
    for (double e : eps) out.push_back(divergence_measure(e));
    return out;
}

MaximalReport maximal_deviation(const Field& f, const Evolver& ev, const TimeGrid& tg) {
    const auto ts = tg.times();
    MaximalReport r{f.grid, {}, ev.tag};
    r.max_dev = chunked_max(ts.size(), f.size(), [&](std::size_t i, RVec& acc) {
        const Field u = ev.apply(f, ts[i]);
        for (std::size_t j = 0; j < f.size(); ++j) acc[j] = std::max(acc[j], std::abs(u[j] - f[j]));
    });
    return r;
}

DkSweep dk_threshold_sweep(const std::vector<double>& s_list, const std::vector<double>& R_list, const DkOptions& opt,
                           const Evolver& ev) {
    const Grid1D g = make_grid(opt.n, opt.length);
    check_window(g, opt.window_lo, opt.window_hi, "probe window");
    if (R_list.size() < 2) throw LabError(ErrorCode::invalid_argument, "the sweep needs at least two R values");
    const auto ts = opt.times.times();
    const auto win = window_indices(g, opt.window_lo, opt.window_hi);

    DkSweep out;
    out.s_list = s_list;
    for (double R : R_list) {
        DataSpec d;
        d.kind = DataKind::dk_packet;
        d.R = R;
        const Field f = generate(d, g);
        std::vector<DkRow> per_t(ts.size());
        parallel_for(ts.size(), [&](std::size_t i) {
            const Field u = ev.apply(f, ts[i]);
            for (std::size_t j : win)
                if (std::abs(u[j]) > per_t[i].peak) per_t[i] = {0, R, std::abs(u[j]), 0, 0, ts[i], g.x(j)};
        });
        DkRow best = per_t[0];
        for (const auto& r : per_t)
            if (r.peak > best.peak) best = r;
        for (double s : s_list) {
            DkRow row = best;
            row.s = s;
            row.hs = sobolev_norm(f, s);
            row.G = row.peak / row.hs;
            out.rows.push_back(row);
        }
    }
    for (double s : s_list) {
        std::vector<double> R, G;
        for (const auto& r : out.rows)
            if (r.s == s) R.push_back(r.R), G.push_back(r.G);
        out.slopes.push_back(fit_loglog(R, G).slope);
    }
    return out;
}

LocalityTable locality_probe(const Field& f, const Evolver& ev, double e_lo, double e_hi, const TimeGrid& tg) {
    const Grid1D& g = f.grid;
    check_window(g, e_lo, e_hi, "window E");
    const auto idx = window_indices(g, e_lo, e_hi);
    double fmax = 0, fe = 0;
    for (std::size_t j = 0; j < g.n; ++j) fmax = std::max(fmax, std::abs(f[j]));
    for (std::size_t j : idx) fe = std::max(fe, std::abs(f[j]));
    if (fe > 1e-14 * fmax) throw LabError(ErrorCode::invalid_argument, "window E meets the support of f");

    const auto ts = tg.times();
    LocalityTable out;
    out.rows.resize(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) {
        const Field u = ev.apply(f, ts[i]);
        const Field u0 = free_propagate(f, ts[i]);
        double d = 0;
        for (std::size_t j : idx) d = std::max(d, std::abs(u[j] - u0[j]));
        out.rows[i] = {ts[i], d};
    });
    std::sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) { return a.t > b.t; });
    out.decreasing = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (!(out.rows[i].diff < out.rows[i - 1].diff)) out.decreasing = false;
    const double first = out.rows.front().diff;
    out.final_over_initial = first > 0 ? out.rows.back().diff / first : 0.0;
    return out;
}

namespace {

void check_localized(double p, const LocalizedOptions& opt) {
    if (!(p > 2) || std::isinf(p)) throw LabError(ErrorCode::invalid_argument, "p must lie in (2, inf)");
    if (!(opt.phi_inner > 0 && opt.phi_inner < opt.phi_outer))
        throw LabError(ErrorCode::invalid_argument, "window phi needs 0 < inner < outer");
    if (!(opt.j_lo < opt.j_hi)) throw LabError(ErrorCode::invalid_argument, "J must be a nonempty interval");
    const double a = opt.phi_center - opt.phi_outer, b = opt.phi_center + opt.phi_outer;
    if (a < opt.j_hi && opt.j_lo < b) throw LabError(ErrorCode::invalid_argument, "supp(phi) meets J");
}

// L^p(J) norm of max_k |e^{i t_k d_xx}(f phi)|.
double localized_lp(const Field& f, double p, const LocalizedOptions& opt) {
    const Grid1D& g = f.grid;
    Field h = f;
    for (std::size_t j = 0; j < g.n; ++j) h[j] *= plateau_bump(g.x(j), opt.phi_center, opt.phi_inner, opt.phi_outer);
    const CVec hh = dft(h);
    const auto ts = opt.times.times();
    const auto idx = window_indices(g, opt.j_lo, opt.j_hi);
    // Modes below 1e-17 of the peak cannot move the result; skipping them saves the phases.
    double hmax = 0;
    for (const auto& c : hh) hmax = std::max(hmax, std::abs(c));
    std::vector<std::size_t> active;
    CVec base; // alternating sign and 1/L folded in, so the inverse is a bare FFT
    for (std::size_t k = 0; k < g.n; ++k)
        if (std::abs(hh[k]) > 1e-17 * hmax) {
            active.push_back(k);
            base.push_back(hh[k] * ((k % 2) ? -1.0 : 1.0) / g.length);
        }
    const bool uniform = opt.times.kind == TimeGrid::Kind::uniform;
    const std::size_t nc = std::max<std::size_t>(1, std::min<std::size_t>(threads(), ts.size()));
    const std::size_t chunk = (ts.size() + nc - 1) / nc;
    std::vector<RVec> accs(nc, RVec(idx.size(), 0.0));
    parallel_for(nc, [&](std::size_t c) {
        CVec v(g.n), ph(active.size()), step(active.size());
        const std::size_t lo = c * chunk, hi = std::min(ts.size(), lo + chunk);
        const double dt = opt.times.t_max / static_cast<double>(opt.times.n);
        if (uniform)
            for (std::size_t q = 0; q < active.size(); ++q) {
                const double xi = g.xi(active[q]);
                step[q] = std::polar(1.0, -dt * xi * xi);
            }
        for (std::size_t i = lo; i < hi; ++i) {
            // exact phases every 32 steps keep the recurrence drift near rounding
            const bool fresh = !uniform || (i - lo) % 32 == 0;
            for (std::size_t q = 0; q < active.size(); ++q) {
                const double xi = g.xi(active[q]);
                ph[q] = fresh ? std::polar(1.0, -ts[i] * xi * xi) : ph[q] * step[q];
            }
            std::fill(v.begin(), v.end(), cplx(0.0));
            for (std::size_t q = 0; q < active.size(); ++q) v[active[q]] = base[q] * ph[q];
            fft::transform(v.data(), g.n, +1);
            for (std::size_t q = 0; q < idx.size(); ++q) accs[c][q] = std::max(accs[c][q], std::abs(v[idx[q]]));
        }
    });
    RVec& M = accs[0];
    for (std::size_t c = 1; c < nc; ++c)
        for (std::size_t q = 0; q < idx.size(); ++q) M[q] = std::max(M[q], accs[c][q]);
    double acc = 0;
    for (double m : M) acc += std::pow(m, p);
    return std::pow(g.dx * acc, 1.0 / p);
}

} // namespace

double localized_maximal_ratio(const Field& f, double s, double p, const LocalizedOptions& opt) {
    check_localized(p, opt);
    const double hs = sobolev_norm(f, s);
    if (!(hs > 0)) throw LabError(ErrorCode::undefined_ratio, "zero datum");
    return localized_lp(f, p, opt) / hs;
}

LocalizedProbe localized_maximal_probe(const std::vector<double>& s_list, double p, const std::vector<double>& R_list,
                                       const LocalizedOptions& opt) {
    check_localized(p, opt);
    const Grid1D g = make_grid(opt.n, opt.length);
    LocalizedProbe out;
    out.s_list = s_list;
    for (double R : R_list) {
        DataSpec d;
        d.kind = DataKind::dk_packet;
        d.R = R;
        d.center = opt.phi_center;
        const Field f = generate(d, g);
        const double lp = localized_lp(f, p, opt);
        for (double s : s_list) {
            const double hs = sobolev_norm(f, s);
            out.rows.push_back({s, R, lp, hs, lp / hs});
        }
    }
    for (double s : s_list) {
        std::vector<double> rho;
        for (const auto& r : out.rows)
            if (r.s == s) rho.push_back(r.rho);
        bool inc = true;
        for (std::size_t i = 1; i < rho.size(); ++i)
            if (!(rho[i] > rho[i - 1])) inc = false;
        out.increasing.push_back(inc);
        out.spread.push_back(*std::max_element(rho.begin(), rho.end()) / *std::min_element(rho.begin(), rho.end()));
    }
    return out;
}

std::string conv_csv_header() { return "experiment,s,R,t_max,epsilon,measure,ratio,slope"; }

std::string conv_csv(const std::vector<ConvCsvRow>& rows) {
    std::ostringstream os;
    os << conv_csv_header() << '\n';
    for (const auto& r : rows)
        os << r.experiment << ',' << num(r.s) << ',' << num(r.R) << ',' << num(r.t_max) << ',' << num(r.epsilon) << ','
           << num(r.measure) << ',' << num(r.ratio) << ',' << num(r.slope) << '\n';
    return os.str();
}

} // namespace lab
