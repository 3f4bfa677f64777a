#include "tb/scf.hpp"

#include <cmath>
#include <stdexcept>

namespace tb {

std::vector<double> potential_from_density(const EffectivePotentialSpec& spec,
                                           const Configuration& config, const Density& rho) {
    const std::size_t n = config.size();
    if (rho.size() != n) throw std::invalid_argument("density length must match the configuration");
    if (!spec.reference_charges.empty() && spec.reference_charges.size() != n)
        throw std::invalid_argument("reference charge length must match the configuration");
    std::vector<double> v(n);
    for (std::size_t l = 0; l < n; ++l) {
        double acc = spec.onsite(rho[l]);
        if (spec.yukawa_strength != 0.0) {
            for (std::size_t m = 0; m < n; ++m) {
                if (m == l) continue;
                const double r = config.distance(l, m);
                const double zm = spec.reference_charges.empty() ? 0.0 : spec.reference_charges[m];
                acc += spec.yukawa_strength * (rho[m] - zm) * std::exp(-spec.yukawa_tau * r) / r;
            }
        }
        v[l] = acc;
    }
    return v;
}

namespace {

struct MapEvaluation {
    Density rho_out;
    EigenDecomposition ed;
};

MapEvaluation evaluate_map(const SCFProblem& problem, const Density& rho) {
    Configuration c = problem.config;
    const std::vector<double> v = potential_from_density(problem.potential, c, rho);
    for (std::size_t l = 0; l < c.size(); ++l) c.sites[l].onsite_potential = v[l];
    MapEvaluation ev;
    ev.ed = eig(assemble(c, problem.model));
    const Observable obs = problem.observable();
    ev.rho_out.resize(c.size());
    if (problem.scheme == SCFScheme::Exact) {
        for (std::size_t l = 0; l < c.size(); ++l) ev.rho_out[l] = local_observable(ev.ed, obs, l);
    } else {
        const InterpolationSet X = InterpolationSet::build(problem.interpolation_nodes);
        for (std::size_t l = 0; l < c.size(); ++l) ev.rho_out[l] = matrix_interpolant(ev.ed, X, obs, l);
    }
    return ev;
}

double inf_norm(const Density& a, const Density& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

Density scf_map(const SCFProblem& problem, const Density& rho) {
    return evaluate_map(problem, rho).rho_out;
}

StabilityOperator stability(const SCFProblem& problem, const Density& rho) {
    const std::size_t n = problem.config.size();
    const MapEvaluation ev = evaluate_map(problem, rho);
    const Observable obs = problem.observable();

    // scalar function applied through the spectrum: exact obs or interpolant
    std::vector<double> node_values;
    InterpolationSet X = InterpolationSet::build({0.0});
    const bool interp = problem.scheme == SCFScheme::Interpolated;
    if (interp) {
        X = InterpolationSet::build(problem.interpolation_nodes);
        node_values = X.values_of(obs);
    }
    const double scale = ev.ed.operator_norm();
    auto dd = [&](double x, double y) {
        if (!interp) return divided_difference(obs, x, y, scale);
        if (std::abs(x - y) < 1e-8 * std::max(1.0, scale))
            return X.eval_derivative(node_values, 0.5 * (x + y));
        return (X.eval(node_values, x) - X.eval(node_values, y)) / (x - y);
    };

    const Eigen::Index ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd DD(ni, ni);
    for (Eigen::Index s = 0; s < ni; ++s)
        for (Eigen::Index t = 0; t < ni; ++t)
            DD(s, t) = dd(ev.ed.eigenvalues(s), ev.ed.eigenvalues(t));

    // F_{lk} = d rho_l / d v_k = sum_{st} psi_{ls} psi_{lt} DD_{st} psi_{ks} psi_{kt}
    const Eigen::MatrixXd& B = ev.ed.eigenvectors;
    Eigen::MatrixXd F(ni, ni);
    for (Eigen::Index l = 0; l < ni; ++l) {
        for (Eigen::Index k = 0; k < ni; ++k) {
            const Eigen::VectorXd u = B.row(l).cwiseProduct(B.row(k)).transpose();
            F(l, k) = u.dot(DD * u);
        }
    }

    // grad v: diagonal onsite derivative plus the Yukawa pair kernel
    Eigen::MatrixXd GV = Eigen::MatrixXd::Zero(ni, ni);
    for (Eigen::Index l = 0; l < ni; ++l) {
        GV(l, l) = problem.potential.onsite_derivative(rho[static_cast<std::size_t>(l)]);
        if (problem.potential.yukawa_strength != 0.0) {
            for (Eigen::Index k = 0; k < ni; ++k) {
                if (k == l) continue;
                const double r = problem.config.distance(static_cast<std::size_t>(l),
                                                         static_cast<std::size_t>(k));
                GV(l, k) = problem.potential.yukawa_strength * std::exp(-problem.potential.yukawa_tau * r) / r;
            }
        }
    }

    StabilityOperator op;
    op.L = F * GV;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd::Identity(ni, ni) - op.L);
    op.min_singular_value_IL = svd.singularValues()(ni - 1);
    if (op.min_singular_value_IL < 1e-10)
        throw std::runtime_error("stability operator: I - L numerically singular");
    return op;
}

SCFResult newton_scf(const SCFProblem& problem, Density rho0, double tol, int max_iter) {
    SCFResult res;
    res.rho = std::move(rho0);
    const auto n = static_cast<Eigen::Index>(res.rho.size());
    Density map_val = scf_map(problem, res.rho);
    double resid = inf_norm(res.rho, map_val);
    res.residual_history.push_back(resid);
    for (int it = 0; it < max_iter; ++it) {
        if (resid <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        const StabilityOperator st = stability(problem, res.rho);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i)
            r(i) = res.rho[static_cast<std::size_t>(i)] - map_val[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - st.L;
        Eigen::VectorXd step = A.partialPivLu().solve(r);

        // halve the step while it increases the residual
        double damping = 1.0;
        for (int half = 0;; ++half) {
            Density trial = res.rho;
            for (Eigen::Index i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] -= damping * step(i);
            Density trial_map = scf_map(problem, trial);
            const double trial_resid = inf_norm(trial, trial_map);
            if (trial_resid < resid || half == 5) {
                res.rho = std::move(trial);
                map_val = std::move(trial_map);
                resid = trial_resid;
                break;
            }
            damping *= 0.5;
        }
        res.residual_history.push_back(resid);
    }
    res.converged = resid <= tol;
    res.iterations = max_iter;
    if (!res.converged) throw std::runtime_error("Newton SCF failed to converge within max_iter");
    return res;
}

SCFResult damped_fixed_point(const SCFProblem& problem, Density rho0, double alpha, double tol,
                             int max_iter) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("mixing parameter must lie in (0,1]");
    SCFResult res;
    res.rho = std::move(rho0);
    int stall_streak = 0;
    double best_resid = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const Density out = scf_map(problem, res.rho);
        const double resid = inf_norm(res.rho, out);
        res.residual_history.push_back(resid);
        if (resid <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        // divergence guard: five steps without any improvement on the best
        // residual means the iteration is growing or cycling
        if (resid < best_resid) {
            best_resid = resid;
            stall_streak = 0;
        } else if (++stall_streak >= 5) {
            res.diverged = true;
            res.iterations = it;
            return res;
        }
        for (std::size_t i = 0; i < res.rho.size(); ++i)
            res.rho[i] = (1.0 - alpha) * res.rho[i] + alpha * out[i];
    }
    res.iterations = max_iter;
    throw std::runtime_error("fixed-point iteration failed to converge within max_iter");
}

}  // namespace tb
