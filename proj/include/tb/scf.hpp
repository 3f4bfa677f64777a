#pragma once

#include <array>
#include <vector>

#include "tb/interp.hpp"
#include "tb/lattice.hpp"
#include "tb/spectral.hpp"

namespace tb {

// Density-dependent effective potential: smooth on-site cubic plus a
// screened (Yukawa) pair term against reference charges.
struct EffectivePotentialSpec {
    std::array<double, 4> onsite_poly{0, 0, 0, 0};  // tilde v coefficients, constant first
    double yukawa_strength = 0.0;
    double yukawa_tau = 1.0;
    std::vector<double> reference_charges;

    double onsite(double rho) const {
        return onsite_poly[0] + rho * (onsite_poly[1] + rho * (onsite_poly[2] + rho * onsite_poly[3]));
    }
    double onsite_derivative(double rho) const {
        return onsite_poly[1] + rho * (2.0 * onsite_poly[2] + rho * 3.0 * onsite_poly[3]);
    }
};

using Density = std::vector<double>;

enum class SCFScheme { Exact, Interpolated };

struct SCFProblem {
    Configuration config;
    HoppingModel model;
    EffectivePotentialSpec potential;
    double beta = kBetaInfinite;
    double mu = 0.0;
    SCFScheme scheme = SCFScheme::Exact;
    std::vector<double> interpolation_nodes;  // Interpolated scheme only

    Observable observable() const { return Observable::fermi_dirac(beta, mu); }
};

std::vector<double> potential_from_density(const EffectivePotentialSpec& spec,
                                           const Configuration& config, const Density& rho);

// One evaluation of the self-consistency map rho -> F(u(rho)).
Density scf_map(const SCFProblem& problem, const Density& rho);

struct StabilityOperator {
    Eigen::MatrixXd L;                 // Jacobian of the map
    double min_singular_value_IL = 0;  // of I - L, diagnostics
};

StabilityOperator stability(const SCFProblem& problem, const Density& rho);

struct SCFResult {
    Density rho;
    std::vector<double> residual_history;  // inf-norm per evaluation
    bool converged = false;
    bool diverged = false;
    int iterations = 0;
};

SCFResult newton_scf(const SCFProblem& problem, Density rho0, double tol, int max_iter);

SCFResult damped_fixed_point(const SCFProblem& problem, Density rho0, double alpha, double tol,
                             int max_iter);

}  // namespace tb
