#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lab/bourgain.hpp"
#include "lab/conv_lab.hpp"
#include "lab/error.hpp"
#include "lab/fit.hpp"
#include "lab/format.hpp"
#include "lab/parallel.hpp"
#include "lab/propagators.hpp"
#include "lab/qnls.hpp"
#include "lab/semiclassical.hpp"
#include "lab/spectral.hpp"
#include "lab/weights.hpp"

using nlohmann::json;
using namespace lab;
namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads a JSON object and records every value it hands out, defaults included,
// so the record doubles as the resolved config.
class Section {
public:
    Section(const json* in, json* out, std::string path) : in_(in), out_(out), path_(std::move(path)) {
        if (in_ && !in_->is_object()) throw ConfigError(path_ + ": expected an object");
        if (!out_->is_object()) *out_ = json::object();
    }

    template <class T>
    T get(const std::string& key, const T& def) {
        T v = def;
        if (in_ && in_->contains(key)) {
            try {
                v = in_->at(key).get<T>();
            } catch (const json::exception&) {
                throw ConfigError(where(key) + ": wrong type");
            }
        }
        (*out_)[key] = v;
        return v;
    }

    Section child(const std::string& key) {
        const json* sub = in_ && in_->contains(key) ? &in_->at(key) : nullptr;
        return Section(sub, &(*out_)[key], where(key));
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* in_;
    json* out_;
    std::string path_;
};

void reject_unknown(const json& in, const json& resolved, const std::string& path) {
    if (!in.is_object()) return;
    for (auto it = in.begin(); it != in.end(); ++it) {
        const std::string p = path.empty() ? it.key() : path + "." + it.key();
        if (!resolved.is_object() || !resolved.contains(it.key())) throw ConfigError("unknown key: " + p);
        reject_unknown(it.value(), resolved.at(it.key()), p);
    }
}

struct Assertion {
    std::string name;
    bool passed = false;
    bool inconclusive = false;
    std::string detail;
};

struct Outcome {
    std::string csv;
    json metrics = json::object();
    std::vector<Assertion> assertions;

    void check(const std::string& name, bool ok, const std::string& detail = "") {
        assertions.push_back({name, ok, false, detail});
    }
    void inconclusive(const std::string& name, const std::string& detail) {
        assertions.push_back({name, true, true, detail});
    }
};

using Job = std::function<Outcome()>;

struct Context {
    Section root;
    Grid1D grid;
    std::uint64_t seed = 0;
};

struct GridDefault {
    long n;
    double length;
};

Grid1D read_grid(Section s, GridDefault d) {
    const long n = s.get<long>("n_points", d.n);
    const double L = s.get<double>("length", d.length);
    return make_grid(n, L);
}

Potential read_potential(Section s, const std::string& kind_default = "zero", double depth = 1.0, double width = 1.0) {
    const auto kind = s.get<std::string>("kind", kind_default);
    const double dp = s.get<double>("depth", depth);
    const double w = s.get<double>("width", width);
    const double v = s.get<double>("value", 0.0);
    const double c = s.get<double>("scale", 1.0);
    Potential V;
    if (kind == "zero") V = Potential::zero();
    else if (kind == "constant") V = Potential::constant(v);
    else if (kind == "gaussian_well") V = Potential::gaussian_well(dp, w);
    else if (kind == "square_well") V = Potential::square_well(dp, w);
    else if (kind == "quadratic") V = Potential::quadratic();
    else throw ConfigError(s.where("kind") + ": unknown potential kind '" + kind + "'");
    return c == 1.0 ? V : V.scaled(c);
}

DataSpec read_data(Section s, std::uint64_t seed, const std::string& kind_default = "gaussian", double width = 1.0) {
    DataSpec d;
    const auto kind = s.get<std::string>("kind", kind_default);
    static const std::map<std::string, DataKind> kinds{{"gaussian", DataKind::gaussian},
                                                       {"single_mode", DataKind::single_mode},
                                                       {"random_hs", DataKind::random_hs},
                                                       {"dk_packet", DataKind::dk_packet},
                                                       {"compact_bump", DataKind::compact_bump}};
    if (!kinds.count(kind)) throw ConfigError(s.where("kind") + ": unknown data kind '" + kind + "'");
    d.kind = kinds.at(kind);
    d.width = s.get<double>("width", width);
    d.center = s.get<double>("center", 0.0);
    d.mode = s.get<long>("mode", 0);
    d.s = s.get<double>("s", 0.25);
    d.epsilon = s.get<double>("epsilon", 0.05);
    d.seed = s.get<std::uint64_t>("seed", seed);
    d.envelope = s.get<double>("envelope", 0.0);
    d.R = s.get<double>("R", 400.0);
    d.amplitude = s.get<double>("amplitude", 1.0);
    const auto norm = s.get<std::string>("normalization", "none");
    if (norm == "none") d.normalization = Normalization::none;
    else if (norm == "l2_unit") d.normalization = Normalization::l2_unit;
    else if (norm == "hs_unit") d.normalization = Normalization::hs_unit;
    else throw ConfigError(s.where("normalization") + ": expected none, l2_unit or hs_unit");
    d.norm_s = s.get<double>("norm_s", 0.0);
    return d;
}

EstimateParams read_params(Section& s, const EstimateParams& def) {
    EstimateParams p;
    p.s = s.get<double>("s", def.s);
    p.a = s.get<double>("a", def.a);
    p.b = s.get<double>("b", def.b);
    p.gamma = s.get<double>("gamma", def.gamma);
    return p;
}

Evolver read_evolver(Section& s, const Potential& V, const std::string& def) {
    const auto name = s.get<std::string>("evolver", def);
    if (name == "free") return free_evolver();
    if (name == "exact") return exact_evolver(V);
    if (name == "trotter") return trotter_evolver(V, s.get<double>("max_step", 1e-3));
    if (name == "qnls_N1") return qnls_evolver(Nonlinearity::N1, s.get<double>("max_step", 1e-4));
    if (name == "qnls_N2") return qnls_evolver(Nonlinearity::N2, s.get<double>("max_step", 1e-4));
    if (name == "qnls_N3") return qnls_evolver(Nonlinearity::N3, s.get<double>("max_step", 1e-4));
    throw ConfigError(s.where("evolver") + ": unknown evolver '" + name + "'");
}

Nonlinearity read_nl(Section& s, const std::string& key, const std::string& def) {
    const auto v = s.get<std::string>(key, def);
    if (v == "N1") return Nonlinearity::N1;
    if (v == "N2") return Nonlinearity::N2;
    if (v == "N3") return Nonlinearity::N3;
    throw ConfigError(s.where(key) + ": expected N1, N2 or N3");
}

std::string rowv(std::initializer_list<double> v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + num(x);
    return s + "\n";
}

// ---- subcommands ----

Job make_propagate(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {256, 32.0});
    const Potential V = read_potential(c.root.child("potential"));
    const Field f = generate(read_data(c.root.child("data"), c.seed), c.grid);
    Section s = c.root.child("propagate");
    const double t = s.get<double>("t", 0.1);
    const auto method = s.get<std::string>("method", "exact");
    const long steps = s.get<long>("steps", 1024);
    return [=]() mutable {
        Field u;
        Outcome o;
        if (method == "free") u = free_propagate(f, t);
        else if (method == "exact") u = exact_propagate(f, t, V);
        else if (method == "lie" || method == "strang")
            u = trotter_evolve(f, t, steps, V, method == "lie" ? Scheme::lie : Scheme::strang).final;
        else if (method == "duhamel") {
            const auto r = duhamel_solve(f, t, V);
            u = r.final;
            o.metrics["picard_iterations"] = r.iterations;
            o.check("quadrature_converged", r.quadrature_converged);
        } else if (method == "mehler") u = mehler_propagate(f, t);
        else throw ConfigError("propagate.method: expected free, exact, lie, strang, duhamel or mehler");
        o.csv = "x,re_in,im_in,re_out,im_out\n";
        for (std::size_t j = 0; j < c.grid.n; ++j)
            o.csv += rowv({c.grid.x(j), f[j].real(), f[j].imag(), u[j].real(), u[j].imag()});
        const double n0 = l2_norm(f), drift = n0 > 0 ? std::abs(l2_norm(u) / n0 - 1) : 0.0;
        o.metrics["l2_in"] = n0;
        o.metrics["l2_out"] = l2_norm(u);
        o.check("finite", u.all_finite());
        if (method != "duhamel") o.check("l2_conserved", drift <= 1e-10, "relative drift " + num(drift));
        if (t == 0.0) o.check("identity_at_t0", l2_distance(u, f) <= 1e-12 * std::max(1.0, n0));
        return o;
    };
}

Job make_trotter_bench(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {512, 32.0});
    const Potential V = read_potential(c.root.child("potential"), "gaussian_well", 2.0, 1.0);
    const Field f = generate(read_data(c.root.child("data"), c.seed), c.grid);
    Section s = c.root.child("trotter-bench");
    const double t = s.get<double>("t", 0.2);
    const auto ns = s.get<std::vector<long>>("n_list", {8, 16, 32, 64, 128, 256, 512});
    const double tol = s.get<double>("slope_tolerance", 0.15);
    return [=]() mutable {
        const Field ref = exact_propagate(f, t, V);
        Outcome o;
        o.csv = "scheme,n,error\n";
        for (Scheme sc : {Scheme::lie, Scheme::strang}) {
            std::vector<double> x, y;
            for (long n : ns) {
                const double e = l2_distance(trotter_evolve(f, t, n, V, sc).final, ref);
                o.csv += std::string(to_string(sc)) + "," + num(double(n)) + "," + num(e) + "\n";
                x.push_back(double(n));
                y.push_back(e);
            }
            const double slope = fit_loglog(x, y).slope, want = sc == Scheme::lie ? -1.0 : -2.0;
            o.metrics[std::string(to_string(sc)) + "_slope"] = slope;
            o.check(std::string(to_string(sc)) + "_order", std::abs(slope - want) <= tol, "slope " + num(slope));
        }
        return o;
    };
}

Job make_qnls(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {256, 32.0});
    Section d = c.root.child("data");
    const Field f = generate(read_data(d, c.seed, "random_hs"), c.grid);
    Section s = c.root.child("qnls");
    const Nonlinearity nl = read_nl(s, "nonlinearity", "N1");
    const double t = s.get<double>("t", 0.1);
    const long steps = s.get<long>("steps", 256);
    const int samples = s.get<int>("samples", 8);
    const auto method = s.get<std::string>("method", "split_step");
    const double tail_s = s.get<double>("tail_s", 0.55);
    return [=]() mutable {
        QnlsRun run;
        if (method == "split_step") run = qnls_split_step(f, t, steps, nl, samples);
        else if (method == "duhamel") {
            PicardOptions opt;
            run = qnls_duhamel(f, t, nl, opt, samples);
        } else throw ConfigError("qnls.method: expected split_step or duhamel");
        const auto tail = duhamel_tail_regularity(run, tail_s);
        Outcome o;
        o.csv = "t,l2,tail\n";
        bool finite = true;
        for (std::size_t i = 0; i < tail.size(); ++i) {
            o.csv += rowv({run.times[i], l2_norm(run.trajectory[i]), tail[i].tail});
            finite = finite && run.trajectory[i].all_finite() && std::isfinite(tail[i].tail);
        }
        o.metrics["method"] = run.method;
        o.metrics["tail_final"] = tail.back().tail;
        o.metrics["data_hs"] = sobolev_norm(f, tail_s);
        o.check("finite", finite);
        return o;
    };
}

Job make_xsb_check(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {128, 32.0});
    Section ds = c.root.child("data");
    const DataSpec base = read_data(ds, c.seed, "random_hs");
    Section s = c.root.child("xsb-check");
    const XsbParams p{s.get<double>("s", 0.25), s.get<double>("b", 0.55)};
    const CutoffProfile eta{s.get<double>("delta", 0.5)};
    const int ensemble = s.get<int>("ensemble", 10);
    const double max_spread = s.get<double>("max_spread", 1.5);
    return [=]() mutable {
        const long nt = min_time_samples(c.grid, eta.delta);
        Outcome o;
        o.csv = "seed,ratio\n";
        double lo = 1e300, hi = 0;
        for (int i = 0; i < ensemble; ++i) {
            DataSpec d = base;
            d.seed = base.seed + static_cast<std::uint64_t>(i);
            const double r = linear_estimate_ratio(generate(d, c.grid), p, eta, nt);
            o.csv += num(double(d.seed)) + "," + num(r) + "\n";
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        o.metrics["n_t"] = nt;
        o.metrics["max_over_min"] = hi / lo;
        o.check("finite", std::isfinite(hi));
        o.check("ensemble_spread", hi / lo <= max_spread, "max/min " + num(hi / lo));
        return o;
    };
}

Job make_weights(Context& c) {
    Section s = c.root.child("weights");
    const auto lemma = s.get<std::string>("lemma", "linear");
    EstimateParams def;
    if (lemma == "n1") def = {0.25, 0.45, 0.51, 0.48};
    else if (lemma == "n2") def = {0.3, 0.2, 0.51, 0.35};
    else if (lemma != "linear") throw ConfigError("weights.lemma: expected linear, n1 or n2");
    const EstimateParams p = read_params(s, def);
    ScanDomain dom;
    dom.xi_max = s.get<double>("xi_max", 1e2);
    dom.tau_max = s.get<double>("tau_max", 1e4);
    dom.per_decade = s.get<int>("per_decade", lemma == "n2" ? 4 : 12);
    return [=]() mutable {
        SupScanResult r;
        if (lemma == "linear") r = weight_sup_linear(p, dom);
        else if (lemma == "n1") r = weight_sup_n1(p, dom);
        else r = weight_sup_n2(p, dom);
        Outcome o;
        o.csv = sup_csv_header() + "\n" + sup_csv_row(r) + "\n";
        o.metrics["sup"] = r.sup_value;
        o.metrics["domain_sups"] = r.domain_sups;
        // No convergence claim exists at the endpoint s = 1/4 for n2.
        if (lemma == "n2" && p.s == 0.25)
            o.inconclusive("sup_finite", "s = 1/4 endpoint, tail ratio " + num(r.tail_ratio));
        else
            o.check("sup_finite", !r.diverged && std::isfinite(r.sup_value), "tail ratio " + num(r.tail_ratio));
        o.check("quadrature_converged", r.converged);
        return o;
    };
}

Job make_action(Context& c) {
    const Potential V = read_potential(c.root.child("potential"), "gaussian_well", 2.0, 1.0);
    Section s = c.root.child("action");
    const auto ts = s.get<std::vector<double>>("times", {0.1, 0.2, 0.4});
    const auto pts = s.get<std::vector<std::vector<double>>>("points", {{0.5, -0.5}, {1.0, 0.0}, {0.0, 1.0}});
    ActionOptions opt;
    opt.tol = s.get<double>("tol", opt.tol);
    opt.n_steps = s.get<long>("n_steps", opt.n_steps);
    opt.delta_cfg = s.get<double>("delta_cfg", opt.delta_cfg);
    return [=]() mutable {
        Outcome o;
        o.csv = "t,x,y,S,S0,w,eta,residual\n";
        double worst = 0;
        for (double t : ts)
            for (const auto& xy : pts) {
                if (xy.size() != 2) throw ConfigError("action.points: each point is [x, y]");
                const auto r = classical_action(t, xy[0], xy[1], V, opt);
                o.csv += rowv({t, xy[0], xy[1], r.S, r.S0, r.w, r.eta, r.residual});
                worst = std::max(worst, std::abs(r.residual));
            }
        o.metrics["max_residual"] = worst;
        o.check("boundary_residual", worst <= 100 * opt.tol, "max residual " + num(worst));
        return o;
    };
}

Job make_kernel_fits(Context& c, bool strict) {
    c.grid = read_grid(c.root.child("grid"), {1024, 32.0});
    const Potential V = read_potential(c.root.child("potential"), "gaussian_well", 0.5, 2.0);
    Section s = c.root.child("kernel-fits");
    const auto ts = s.get<std::vector<double>>("times", {0.4, 0.2, 0.1, 0.05});
    KernelOptions opt;
    opt.D = s.get<double>("D", opt.D);
    opt.stride = s.get<long>("stride", opt.stride);
    const auto amp_band = s.get<std::vector<double>>("amplitude_band", {1.6, 2.4});
    const auto disp_band = s.get<std::vector<double>>("dispersive_band", {-0.6, -0.4});
    return [=]() mutable {
        Outcome o;
        const auto d = dispersive_fit(V, ts, c.grid, opt);
        o.csv = "fit,t,value,noise\n";
        for (const auto& r : d.rows) o.csv += "dispersive," + rowv({r.t, r.sup_K, 0.0});
        o.metrics["dispersive_slope"] = d.slope;
        o.check("dispersive_slope", d.slope >= disp_band.at(0) && d.slope <= disp_band.at(1), "slope " + num(d.slope));
        if (V.kind == PotentialKind::quadratic) {
            o.metrics["amplitude"] = "skipped for the oscillator";
            return o;
        }
        const auto a = amplitude_fit(V, ts, c.grid, opt);
        for (const auto& r : a.rows) o.csv += "amplitude," + rowv({r.t, r.sup_k_minus_1, r.noise});
        o.metrics["amplitude_slope"] = a.slope;
        if (a.inconclusive) {
            if (strict) o.check("amplitude_slope", false, "inconclusive: signal at the noise floor");
            else o.inconclusive("amplitude_slope", "signal at the noise floor");
        } else {
            o.check("amplitude_slope", a.slope >= amp_band.at(0) && a.slope <= amp_band.at(1), "slope " + num(a.slope));
        }
        return o;
    };
}

Job make_maximal(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {512, 32.0});
    const Potential V = read_potential(c.root.child("potential"));
    const Field f = generate(read_data(c.root.child("data"), c.seed), c.grid);
    Section s = c.root.child("maximal");
    const Evolver ev = read_evolver(s, V, "free");
    const auto tmax = s.get<std::vector<double>>("t_max", {0.04, 0.02, 0.01});
    const long scales = s.get<long>("n_scales", 8);
    const auto eps = s.get<std::vector<double>>("epsilon", {0.005, 0.01, 0.02, 0.05});
    return [=]() mutable {
        Outcome o;
        std::vector<ConvCsvRow> rows;
        bool mono_eps = true, mono_t = true;
        std::vector<double> prev;
        for (double tm : tmax) {
            const auto r = maximal_deviation(f, ev, TimeGrid::dyadic(tm, scales));
            const auto ms = r.divergence_measures(eps);
            for (std::size_t i = 0; i < eps.size(); ++i) {
                rows.push_back({"maximal", 0, 0, tm, eps[i], ms[i], 0, 0});
                if (i > 0 && eps[i] > eps[i - 1] && ms[i] > ms[i - 1]) mono_eps = false;
                if (!prev.empty() && ms[i] > prev[i]) mono_t = false;
            }
            prev = ms;
        }
        o.csv = conv_csv(rows);
        o.metrics["evolver"] = ev.tag;
        o.check("measure_monotone_in_epsilon", mono_eps);
        o.check("measure_nonincreasing_in_t_max", mono_t);
        return o;
    };
}

Job make_dk_sweep(Context& c) {
    Section s = c.root.child("dk-sweep");
    const auto sl = s.get<std::vector<double>>("s_list", {0.1, 0.25, 0.4});
    const auto Rl = s.get<std::vector<double>>("R_list", {400, 1600, 6400});
    DkOptions opt;
    opt.n = s.get<long>("n_points", opt.n);
    opt.length = s.get<double>("length", opt.length);
    opt.window_lo = s.get<double>("window_lo", opt.window_lo);
    opt.window_hi = s.get<double>("window_hi", opt.window_hi);
    opt.times = TimeGrid::dyadic(s.get<double>("t_max", 1.0), s.get<long>("n_scales", 26));
    const double tol = s.get<double>("slope_tolerance", 0.05);
    return [=]() mutable {
        const auto sw = dk_threshold_sweep(sl, Rl, opt);
        Outcome o;
        std::vector<ConvCsvRow> rows;
        for (const auto& r : sw.rows) rows.push_back({"dk", r.s, r.R, r.t_star, 0, 0, r.G, 0});
        for (std::size_t i = 0; i < sl.size(); ++i) {
            rows.push_back({"dk_slope", sl[i], 0, 0, 0, 0, 0, sw.slopes[i]});
            const double want = 0.25 - sl[i];
            o.check("slope_s=" + num(sl[i]), std::abs(sw.slopes[i] - want) <= tol,
                    "slope " + num(sw.slopes[i]) + ", predicted " + num(want));
        }
        o.csv = conv_csv(rows);
        o.metrics["slopes"] = sw.slopes;
        return o;
    };
}

Job make_locality(Context& c) {
    c.grid = read_grid(c.root.child("grid"), {1024, 16.0});
    const Potential V = read_potential(c.root.child("potential"), "gaussian_well", 1.0, 1.0);
    const Field f = generate(read_data(c.root.child("data"), c.seed, "compact_bump", 1.5), c.grid);
    Section s = c.root.child("locality");
    const auto E = s.get<std::vector<double>>("window", {3.0, 5.0});
    if (E.size() != 2) throw ConfigError("locality.window: expected [lo, hi]");
    const Evolver ev = read_evolver(s, V, "exact");
    const auto tg = TimeGrid::dyadic(s.get<double>("t_max", 0.1), s.get<long>("n_scales", 5));
    return [=]() mutable {
        const auto t = locality_probe(f, ev, E[0], E[1], tg);
        Outcome o;
        std::vector<ConvCsvRow> rows;
        for (const auto& r : t.rows) rows.push_back({"locality", 0, 0, r.t, 0, 0, r.diff, 0});
        o.csv = conv_csv(rows);
        o.metrics["final_over_initial"] = t.final_over_initial;
        if (V.is_constant() && V.constant_value() == 0.0) {
            double m = 0;
            for (const auto& r : t.rows) m = std::max(m, r.diff);
            o.check("zero_difference", m < 1e-12, "max " + num(m));
        } else {
            o.check("decreasing", t.decreasing);
            o.check("decade_decay", t.final_over_initial < 0.1, "final/initial " + num(t.final_over_initial));
        }
        return o;
    };
}

Job make_localized(Context& c) {
    Section s = c.root.child("localized-maximal");
    const auto sl = s.get<std::vector<double>>("s_list", {0.15, 0.4});
    const double p = s.get<double>("p", 4.0);
    const auto Rl = s.get<std::vector<double>>("R_list", {400, 1600, 6400});
    LocalizedOptions opt;
    opt.n = s.get<long>("n_points", opt.n);
    opt.length = s.get<double>("length", opt.length);
    opt.phi_center = s.get<double>("phi_center", opt.phi_center);
    opt.phi_inner = s.get<double>("phi_inner", opt.phi_inner);
    opt.phi_outer = s.get<double>("phi_outer", opt.phi_outer);
    opt.j_lo = s.get<double>("j_lo", opt.j_lo);
    opt.j_hi = s.get<double>("j_hi", opt.j_hi);
    opt.times = TimeGrid::uniform(s.get<double>("t_max", 0.005), s.get<long>("n_times", 10240));
    const double max_spread = s.get<double>("max_spread", 2.0);
    return [=]() mutable {
        const auto pr = localized_maximal_probe(sl, p, Rl, opt);
        Outcome o;
        std::vector<ConvCsvRow> rows;
        for (const auto& r : pr.rows) rows.push_back({"localized", r.s, r.R, opt.times.t_max, 0, 0, r.rho, 0});
        o.csv = conv_csv(rows);
        for (std::size_t i = 0; i < sl.size(); ++i) {
            if (sl[i] < 0.25) o.check("increasing_s=" + num(sl[i]), pr.increasing[i]);
            else o.check("bounded_s=" + num(sl[i]), pr.spread[i] <= max_spread, "spread " + num(pr.spread[i]));
        }
        o.metrics["spread"] = pr.spread;
        return o;
    };
}

const std::vector<std::string> kSubcommands{"propagate", "trotter-bench", "qnls",  "xsb-check",
                                            "weights",   "action",        "kernel-fits", "maximal",
                                            "dk-sweep",  "locality",      "localized-maximal"};

std::string usage() {
    std::string u = "usage: lab_cli <subcommand> [--config file.json] [--out dir] [--seed n] [--threads n] [--strict]\n"
                    "subcommands:";
    for (const auto& s : kSubcommands) u += " " + s;
    return u + "\n";
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

fs::path fresh_dir(const fs::path& base) {
    const std::string ts = timestamp();
    fs::path p = base / ts;
    for (int i = 2; fs::exists(p); ++i) p = base / (ts + "-" + std::to_string(i));
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    os << s;
    if (!os) throw std::runtime_error("cannot write " + p.string());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral lab experiments"};
    std::string sub, config_path, out_dir = "results";
    std::optional<std::uint64_t> seed_flag;
    std::optional<unsigned> threads_flag;
    bool strict = false;
    app.add_option("subcommand", sub, "experiment to run")->required();
    app.add_option("--config", config_path, "JSON config");
    app.add_option("--out", out_dir, "output root");
    app.add_option("--seed", seed_flag, "seed");
    app.add_option("--threads", threads_flag, "worker threads");
    app.add_flag("--strict", strict, "treat inconclusive assertions as failures");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << usage();
            return 0;
        }
        std::cerr << e.what() << "\n" << usage();
        return 1;
    }
    if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end()) {
        std::cerr << "unknown subcommand '" << sub << "'\n" << usage();
        return 1;
    }

    json input = json::object(), resolved = json::object();
    try {
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("cannot open config " + config_path);
            try {
                input = json::parse(is);
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("config does not parse: ") + e.what());
            }
            if (!input.is_object()) throw ConfigError("config root must be an object");
        }
        Context ctx{Section(&input, &resolved, ""), {}, 0};
        const auto cfg_seed = ctx.root.get<std::uint64_t>("seed", 0);
        ctx.seed = seed_flag.value_or(cfg_seed);
        resolved["seed"] = ctx.seed;
        unsigned nthreads = 1;
        if (const char* env = std::getenv("LAB_THREADS")) nthreads = static_cast<unsigned>(std::max(1L, std::atol(env)));
        nthreads = ctx.root.get<unsigned>("threads", nthreads);
        if (threads_flag) nthreads = *threads_flag;
        resolved["threads"] = nthreads;
        set_threads(nthreads);

        Job job;
        if (sub == "propagate") job = make_propagate(ctx);
        else if (sub == "trotter-bench") job = make_trotter_bench(ctx);
        else if (sub == "qnls") job = make_qnls(ctx);
        else if (sub == "xsb-check") job = make_xsb_check(ctx);
        else if (sub == "weights") job = make_weights(ctx);
        else if (sub == "action") job = make_action(ctx);
        else if (sub == "kernel-fits") job = make_kernel_fits(ctx, strict);
        else if (sub == "maximal") job = make_maximal(ctx);
        else if (sub == "dk-sweep") job = make_dk_sweep(ctx);
        else if (sub == "locality") job = make_locality(ctx);
        else job = make_localized(ctx);
        reject_unknown(input, resolved, "");
        Outcome o = job();

        bool all = true;
        json asserts = json::array();
        for (const auto& a : o.assertions) {
            all = all && a.passed;
            asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"inconclusive", a.inconclusive}, {"detail", a.detail}});
        }
        const int code = all ? 0 : 2;
        json summary = {{"subcommand", sub}, {"assertions", asserts}, {"metrics", o.metrics}, {"strict", strict},
                        {"exit_code", code}};
        const fs::path dir = fresh_dir(fs::path(out_dir) / sub);
        write_file(dir / "resolved.json", resolved.dump(2) + "\n");
        write_file(dir / "data.csv", o.csv);
        write_file(dir / "summary.json", summary.dump(2) + "\n");
        for (const auto& a : o.assertions)
            std::cout << (a.inconclusive ? "INCONCLUSIVE " : a.passed ? "PASS " : "FAIL ") << a.name
                      << (a.detail.empty() ? "" : " (" + a.detail + ")") << "\n";
        std::cout << dir.string() << "\n";
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
