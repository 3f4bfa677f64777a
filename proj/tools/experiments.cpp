#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <optional>

#include "tb/interp.hpp"
#include "tb/lattice.hpp"
#include "tb/potential.hpp"
#include "tb/ratefit.hpp"
#include "tb/recursion.hpp"
#include "tb/scf.hpp"
#include "tb/spectral.hpp"

namespace tbx {

namespace {

std::string fmt(double v) {
    if (v == 0.0) v = 0.0;  // normalise the sign of zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_header(const Experiment& ex, std::ostream& out, const std::string& columns) {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ex.config_hash));
    out << "# " << kToolVersion << "\n";
    out << "# config-hash: " << hash << "\n";
    out << "# seed: " << static_cast<std::uint64_t>(ex.config.number_or("seed", 0)) << "\n";
    out << "# columns: " << columns << "\n";
}

struct BuiltSystem {
    tb::Configuration config;
    tb::HoppingModel model;
    std::size_t center = 0;
};

BuiltSystem build_system(const Toml& c) {
    BuiltSystem sys;
    const std::string kind = c.str_or("system.kind", "chain");
    const auto n = static_cast<std::size_t>(c.number_or("system.n", 40));
    const double spacing = c.number_or("system.spacing", 1.0);
    const std::vector<double> pattern = c.numbers_or("system.pattern", {});
    if (kind == "chain") {
        sys.config = tb::make_chain(n, spacing, pattern);
    } else if (kind == "defect_chain") {
        sys.config = tb::make_defect_chain(n, spacing, pattern,
                                           static_cast<std::size_t>(c.number("system.defect_site")),
                                           c.number("system.defect_potential"));
    } else if (kind == "dimerized_chain") {
        const double d2 = c.number("system.spacing2");
        sys.config.dim = 1;
        double x = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            tb::SiteState s;
            s.position = tb::Vec3(x, 0.0, 0.0);
            sys.config.sites.push_back(s);
            x += (i % 2 == 0) ? spacing : d2;
        }
    } else {
        throw ConfigError("unknown system.kind '" + kind + "'");
    }
    sys.model.h0 = c.number_or("model.h0", 1.0);
    sys.model.gamma0 = c.number_or("model.gamma0", 1.0);
    sys.model.three_centre_t0 = c.number_or("model.t0", 0.0);
    sys.model.onsite_shift = c.number_or("model.onsite_shift", 0.0);
    sys.center = static_cast<std::size_t>(c.number_or("system.center", static_cast<double>(n / 2)));
    if (sys.center >= n) throw ConfigError("system.center out of range");
    return sys;
}

tb::Observable make_observable(const Toml& c) {
    const std::string kind = c.str_or("observable.kind", "fermi_dirac");
    const double beta = c.number_or_inf("observable.beta", 100.0);
    const double mu = c.number_or("observable.mu", 0.0);
    if (kind == "fermi_dirac") return tb::Observable::fermi_dirac(beta, mu);
    if (kind == "grand_potential") return tb::Observable::grand_potential(beta, mu);
    throw ConfigError("unknown observable.kind '" + kind + "'");
}

std::vector<double> error_grid(const tb::IntervalSet& E, int total_points) {
    double len = 0.0;
    for (int b = 0; b < E.bands(); ++b) len += E.band_hi(b) - E.band_lo(b);
    std::vector<double> grid;
    for (int b = 0; b < E.bands(); ++b) {
        const double lo = E.band_lo(b), hi = E.band_hi(b);
        const int pts = std::max(2, static_cast<int>(std::lround(total_points * (hi - lo) / len)));
        for (int i = 0; i < pts; ++i) grid.push_back(lo + (hi - lo) * i / (pts - 1.0));
    }
    return grid;
}

// ordered concurrent map over the sweep values
template <typename F>
auto ordered_map(int threads, const std::vector<double>& sweep, F&& f)
    -> std::vector<decltype(f(0.0))> {
    using R = decltype(f(0.0));
    std::vector<R> results(sweep.size());
    const int lanes = std::max(1, threads);
    std::size_t next = 0;
    while (next < sweep.size()) {
        std::vector<std::pair<std::size_t, std::future<R>>> wave;
        for (int lane = 0; lane < lanes && next < sweep.size(); ++lane, ++next)
            wave.emplace_back(next, std::async(std::launch::async, f, sweep[next]));
        for (auto& [idx, fut] : wave) results[idx] = fut.get();
    }
    return results;
}

std::string running_rate(std::vector<double>& xs, std::vector<double>& errs, double x, double err) {
    xs.push_back(x);
    errs.push_back(err);
    if (xs.size() < 4) return "nan";
    try {
        const tb::RateFit fit = tb::fit_rate(tb::ErrorCurve::make(xs, errs), tb::WindowPolicy::AutoTail);
        return fmt(-fit.slope);
    } catch (const std::exception&) {
        try {
            const tb::RateFit fit = tb::fit_rate(tb::ErrorCurve::make(xs, errs), tb::WindowPolicy::All);
            return fmt(-fit.slope);
        } catch (const std::exception&) {
            return "nan";
        }
    }
}

struct FitLine {
    double slope = 0, r2 = 0;
    bool ok = false;
};

FitLine fit_or_nothing(const std::vector<double>& x, const std::vector<double>& e) {
    FitLine f;
    try {
        const tb::RateFit fit = tb::fit_rate(tb::ErrorCurve::make(x, e), tb::WindowPolicy::AutoTail);
        f.slope = fit.slope;
        f.r2 = fit.r2;
        f.ok = true;
    } catch (const std::exception&) {
    }
    return f;
}

}  // namespace

Experiment make_experiment(const Toml& config, int threads) {
    Experiment ex;
    ex.config = config;
    ex.config_hash = fnv1a64(config.canonical());
    ex.threads = threads;
    return ex;
}

void run_converge(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const BuiltSystem sys = build_system(c);
    const tb::Observable obs = make_observable(c);
    const std::string scheme = c.str_or("scheme.kind", "fejer");
    const tb::Hamiltonian H = tb::assemble(sys.config, sys.model);
    const tb::EigenDecomposition ed = tb::eig(H);
    const double exact = tb::local_observable(ed, obs, sys.center);
    const std::vector<double> sweep = c.numbers("sweep.values");

    std::optional<tb::GreenParams> params;
    std::optional<tb::EquilibriumCDF> cdf;
    std::vector<double> grid;
    if (scheme == "fejer" || scheme == "leja") {
        params = tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set")));
        cdf = tb::equilibrium_cdf(*params);
        grid = error_grid(params->set, 2000);
    } else if (scheme == "chebyshev" || scheme == "kpm") {
        const double lo = ed.eigenvalues(0), hi = ed.eigenvalues(ed.eigenvalues.size() - 1);
        const double pad = 0.01 * (hi - lo);
        for (int i = 0; i < 2000; ++i) grid.push_back(lo - pad + (hi - lo + 2 * pad) * i / 1999.0);
    }

    const tb::DampingKernel kernel = [&] {
        const std::string k = c.str_or("scheme.kernel", "none");
        if (k == "none") return tb::DampingKernel::none();
        if (k == "fejer") return tb::DampingKernel::fejer();
        if (k == "jackson") return tb::DampingKernel::jackson();
        throw ConfigError("unknown scheme.kernel '" + k + "'");
    }();

    struct Row {
        double sup = std::nan("");
        double obs_err = std::nan("");
    };
    auto evaluate = [&](double param) -> Row {
        const int N = static_cast<int>(param);
        Row row;
        if (scheme == "fejer" || scheme == "leja") {
            const std::vector<double> nodes = (scheme == "fejer")
                                                  ? tb::fejer_points(*params, *cdf, N + 1)
                                                  : tb::leja_points(*params, N + 1);
            const auto X = tb::InterpolationSet::build(nodes);
            const auto vals = X.values_of(obs);
            double sup = 0.0;
            for (double x : grid) sup = std::max(sup, std::abs(obs(x) - X.eval(vals, x)));
            row.sup = sup;
            row.obs_err = std::abs(exact - tb::matrix_interpolant(ed, X, obs, sys.center));
        } else if (scheme == "chebyshev") {
            const double lo = grid.front(), hi = grid.back();
            const tb::ChebSeries s = tb::cheb_project(obs, N, lo, hi);
            double sup = 0.0;
            for (double x : grid) sup = std::max(sup, std::abs(obs(x) - s.eval(x)));
            row.sup = sup;
            double through = 0.0;
            for (Eigen::Index q = 0; q < ed.eigenvalues.size(); ++q) {
                const double w = ed.eigenvectors(static_cast<Eigen::Index>(sys.center), q);
                through += s.eval(ed.eigenvalues(q)) * w * w;
            }
            row.obs_err = std::abs(exact - through);
        } else if (scheme == "kpm") {
            row.obs_err = std::abs(exact - tb::kpm_estimate(H.matrix, sys.center, obs, N, kernel));
        } else if (scheme == "bop") {
            row.obs_err = std::abs(exact - tb::theta(tb::lanczos(H, sys.center, N), obs));
        } else if (scheme == "vacuum") {
            row.obs_err = std::abs(exact - tb::vacuum_sum(sys.config, sys.model, obs, sys.center, N));
        } else {
            throw ConfigError("unknown scheme.kind '" + scheme + "'");
        }
        return row;
    };

    const auto rows = ordered_map(ex.threads, sweep, evaluate);

    write_header(ex, out, "param,sup_error_on_E,observable_error_at_center,measured_rate_so_far");
    out << "# scheme: " << scheme << "\n";
    out << "# spectrum: [" << fmt(ed.eigenvalues(0)) << ","
        << fmt(ed.eigenvalues(ed.eigenvalues.size() - 1)) << "]\n";
    if (params) {
        int stray = 0;
        for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s)
            if (!params->set.contains(ed.eigenvalues(s), 1e-12)) ++stray;
        if (stray > 0)
            out << "# warning: " << stray
                << " eigenvalue(s) outside interval_set; the observable column extrapolates\n";
    }
    std::vector<double> xs, errs;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const double primary = std::isnan(rows[i].sup) ? rows[i].obs_err : rows[i].sup;
        const std::string rate = running_rate(xs, errs, sweep[i], primary);
        out << fmt(sweep[i]) << "," << fmt(rows[i].sup) << "," << fmt(rows[i].obs_err) << "," << rate
            << "\n";
    }
}

void run_truncation(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const BuiltSystem sys = build_system(c);
    const tb::Observable obs = make_observable(c);
    const tb::EigenDecomposition ed = tb::eig(tb::assemble(sys.config, sys.model));
    const double exact = tb::local_observable(ed, obs, sys.center);

    const tb::GreenParams params =
        tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set")));
    const auto X = tb::InterpolationSet::build(
        tb::fejer_points(params, static_cast<int>(c.number_or("scheme.nodes", 40))));
    const double interp_full = tb::matrix_interpolant(ed, X, obs, sys.center);

    const std::vector<double> sweep = c.numbers("sweep.values");
    struct Row {
        double banded, nbh_interp, nbh_exact;
    };
    auto evaluate = [&](double rc) -> Row {
        const tb::Hamiltonian hb = tb::banded(sys.config, sys.model, rc);
        const double banded_err =
            std::abs(exact - tb::local_observable(tb::eig(hb), obs, sys.center));
        const tb::Hamiltonian hn = tb::neighborhood_truncate(sys.config, sys.model, sys.center, rc);
        const tb::EigenDecomposition edn = tb::eig(hn);
        const std::size_t row = hn.row_of(sys.center);
        const double nbh_interp = std::abs(interp_full - tb::matrix_interpolant(edn, X, obs, row));
        const double nbh_exact = std::abs(exact - tb::local_observable(edn, obs, row));
        return {banded_err, nbh_interp, nbh_exact};
    };
    const auto rows = ordered_map(ex.threads, sweep, evaluate);

    write_header(ex, out, "r_c,banded_error,neighborhood_error_interp,neighborhood_error_exact");
    std::vector<double> b, ni, ne;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        b.push_back(rows[i].banded);
        ni.push_back(rows[i].nbh_interp);
        ne.push_back(rows[i].nbh_exact);
        out << fmt(sweep[i]) << "," << fmt(rows[i].banded) << "," << fmt(rows[i].nbh_interp) << ","
            << fmt(rows[i].nbh_exact) << "\n";
    }
    for (const auto& [name, e] : {std::pair{"banded", &b}, {"neighborhood_interp", &ni},
                                  {"neighborhood_exact", &ne}}) {
        const FitLine f = fit_or_nothing(sweep, *e);
        if (f.ok)
            out << "# fit " << name << ": slope=" << fmt(f.slope) << " r2=" << fmt(f.r2) << "\n";
    }
}

void run_locality(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const BuiltSystem sys = build_system(c);
    const tb::Observable obs = make_observable(c);
    const tb::EigenDecomposition ed = tb::eig(tb::assemble(sys.config, sys.model));
    const tb::GreenParams params =
        tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set")));
    const auto X = tb::InterpolationSet::build(
        tb::fejer_points(params, static_cast<int>(c.number_or("scheme.nodes", 40))));
    const auto node_values = X.values_of(obs);
    const double scale = ed.operator_norm();
    const std::size_t l = static_cast<std::size_t>(c.number_or("system.center", 2));

    // divided-difference kernel of the interpolated observable
    auto interp_derivative = [&](std::size_t m) {
        const Eigen::Index n = ed.eigenvalues.size();
        double acc = 0.0;
        for (Eigen::Index s = 0; s < n; ++s) {
            for (Eigen::Index t = 0; t < n; ++t) {
                const double w = ed.eigenvectors(static_cast<Eigen::Index>(l), s) *
                                 ed.eigenvectors(static_cast<Eigen::Index>(l), t);
                const double vm = ed.eigenvectors(static_cast<Eigen::Index>(m), s) *
                                  ed.eigenvectors(static_cast<Eigen::Index>(m), t);
                if (w == 0.0 || vm == 0.0) continue;
                const double a = ed.eigenvalues(s), bb = ed.eigenvalues(t);
                const double dd = (std::abs(a - bb) < 1e-8 * std::max(1.0, scale))
                                      ? X.eval_derivative(node_values, 0.5 * (a + bb))
                                      : (X.eval(node_values, a) - X.eval(node_values, bb)) / (a - bb);
                acc += w * dd * vm;
            }
        }
        return acc;
    };

    const std::vector<double> sweep = c.numbers("sweep.values");
    struct Row {
        double r, exact_d, interp_d;
    };
    auto evaluate = [&](double offset) -> Row {
        const std::size_t m = l + static_cast<std::size_t>(offset);
        if (m >= sys.config.size()) throw ConfigError("sweep offset exceeds the chain length");
        return {sys.config.distance(l, m),
                std::abs(tb::observable_derivative_potential(ed, obs, l, m)),
                std::abs(interp_derivative(m))};
    };
    const auto rows = ordered_map(ex.threads, sweep, evaluate);

    write_header(ex, out, "distance,derivative_exact_abs,derivative_interp_abs");
    std::vector<double> r, de, di;
    for (const auto& row : rows) {
        r.push_back(row.r);
        de.push_back(row.exact_d);
        di.push_back(row.interp_d);
        out << fmt(row.r) << "," << fmt(row.exact_d) << "," << fmt(row.interp_d) << "\n";
    }
    for (const auto& [name, e] : {std::pair{"exact", &de}, {"interp", &di}}) {
        const FitLine f = fit_or_nothing(r, *e);
        if (f.ok)
            out << "# fit " << name << ": slope=" << fmt(f.slope) << " r2=" << fmt(f.r2) << "\n";
    }
}

void run_scf(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const BuiltSystem sys = build_system(c);
    tb::SCFProblem prob;
    prob.config = sys.config;
    prob.model = sys.model;
    prob.beta = c.number_or_inf("observable.beta", 100.0);
    prob.mu = c.number_or("observable.mu", 0.0);
    const auto poly = c.numbers_or("scf.onsite_poly", {0, 0, 0, 0});
    if (poly.size() != 4) throw ConfigError("scf.onsite_poly must have four coefficients");
    std::copy(poly.begin(), poly.end(), prob.potential.onsite_poly.begin());
    prob.potential.yukawa_strength = c.number_or("scf.yukawa_strength", 0.0);
    prob.potential.yukawa_tau = c.number_or("scf.yukawa_tau", 1.0);
    prob.potential.reference_charges.assign(sys.config.size(), c.number_or("scf.reference_charge", 0.5));

    const tb::Density rho0(sys.config.size(), c.number_or("scf.rho0", 0.5));
    const double tol = c.number_or("scf.tol", 1e-12);
    const int max_iter = static_cast<int>(c.number_or("scf.max_iter", 50));
    const std::string solver = c.str_or("scf.solver", "newton");

    tb::SCFResult res;
    if (solver == "newton") {
        res = tb::newton_scf(prob, rho0, tol, max_iter);
    } else if (solver == "fixed_point") {
        res = tb::damped_fixed_point(prob, rho0, c.number_or("scf.mixing", 0.5), tol, max_iter);
    } else {
        throw ConfigError("unknown scf.solver '" + solver + "'");
    }

    write_header(ex, out, "iteration,residual_inf");
    out << "# solver: " << solver << "\n";
    out << "# converged: " << (res.converged ? "yes" : "no") << " iterations: " << res.iterations
        << "\n";
    if (c.has("scheme.interval_set")) {
        tb::SCFProblem ip = prob;
        ip.scheme = tb::SCFScheme::Interpolated;
        ip.interpolation_nodes = tb::fejer_points(
            tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set"))),
            static_cast<int>(c.number_or("scheme.nodes", 40)));
        const tb::SCFResult ires =
            tb::newton_scf(ip, tb::Density(sys.config.size(), c.number_or("scf.reference_charge", 0.5)),
                           tol, max_iter);
        const tb::SCFResult eres =
            tb::newton_scf(prob, tb::Density(sys.config.size(), c.number_or("scf.reference_charge", 0.5)),
                           tol, max_iter);
        double gap = 0.0;
        for (std::size_t i = 0; i < ires.rho.size(); ++i)
            gap = std::max(gap, std::abs(ires.rho[i] - eres.rho[i]));
        out << "# interp-fixed-point-gap: " << fmt(gap) << "\n";
    }
    for (std::size_t i = 0; i < res.residual_history.size(); ++i)
        out << i << "," << fmt(res.residual_history[i]) << "\n";
}

void run_nodes(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const tb::GreenParams params =
        tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set")));
    const tb::EquilibriumCDF cdf = tb::equilibrium_cdf(params);
    const std::string scheme = c.str_or("scheme.kind", "fejer");
    const std::vector<double> sweep = c.numbers("sweep.values");

    write_header(ex, out, "n,j,node,green_value");
    out << "# interval_set: " << params.set.str() << "\n";
    out << "# capacity: " << fmt(tb::capacity(params)) << "\n";
    for (double nv : sweep) {
        const int n = static_cast<int>(nv);
        const std::vector<double> pts = (scheme == "leja") ? tb::leja_points(params, n)
                                                           : tb::fejer_points(params, cdf, n);
        for (std::size_t j = 0; j < pts.size(); ++j)
            out << n << "," << j << "," << fmt(pts[j]) << ","
                << fmt(tb::green_value(params, tb::Complex(pts[j], 0.0))) << "\n";
    }
}

void run_vacuum(const Experiment& ex, std::ostream& out) {
    const Toml& c = ex.config;
    const BuiltSystem sys = build_system(c);
    const tb::Observable obs = make_observable(c);
    const tb::EigenDecomposition ed = tb::eig(tb::assemble(sys.config, sys.model));
    const double exact = tb::local_observable(ed, obs, sys.center);
    const tb::GreenParams params =
        tb::solve_gap_params(tb::IntervalSet::parse(c.str("scheme.interval_set")));
    const tb::EquilibriumCDF cdf = tb::equilibrium_cdf(params);

    const std::vector<double> sweep = c.numbers("sweep.values");
    struct Row {
        double vac, interp;
    };
    auto evaluate = [&](double nv) -> Row {
        const int N = static_cast<int>(nv);
        const double vac =
            std::abs(exact - tb::vacuum_sum(sys.config, sys.model, obs, sys.center, N));
        // matched body order: an interpolation set with N nodes
        const auto X = tb::InterpolationSet::build(tb::fejer_points(params, cdf, std::max(N, 2)));
        const double interp = std::abs(exact - tb::matrix_interpolant(ed, X, obs, sys.center));
        return {vac, interp};
    };
    const auto rows = ordered_map(ex.threads, sweep, evaluate);

    write_header(ex, out, "N,vacuum_error,interpolation_error_matched");
    for (std::size_t i = 0; i < sweep.size(); ++i)
        out << fmt(sweep[i]) << "," << fmt(rows[i].vac) << "," << fmt(rows[i].interp) << "\n";
}

}  // namespace tbx
