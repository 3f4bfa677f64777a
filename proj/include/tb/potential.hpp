#pragma once

#include <complex>
#include <string>
#include <vector>

#include "tb/spectral.hpp"

namespace tb {

// Union of finitely many disjoint closed intervals on the real line,
// [e0,e1] U [e2,e3] U ... with strictly ascending endpoints.
struct IntervalSet {
    std::vector<double> endpoints;

    explicit IntervalSet(std::vector<double> ends);
    static IntervalSet parse(const std::string& text);  // "[-1,-0.2]U[0.2,1]"
    std::string str() const;

    int bands() const { return static_cast<int>(endpoints.size()) / 2; }
    double band_lo(int i) const { return endpoints[2 * static_cast<std::size_t>(i)]; }
    double band_hi(int i) const { return endpoints[2 * static_cast<std::size_t>(i) + 1]; }
    double lo() const { return endpoints.front(); }
    double hi() const { return endpoints.back(); }
    bool contains(double x, double tol = 0.0) const;
};

// Numerator coefficients of the Green's-function integrand for an interval
// set with m bands: P(z) = z^{m-1} + sum_j c_j z^j, chosen so that the
// integral of P / sqrt(prod |z - e_k|) over every gap vanishes.
struct GreenParams {
    IntervalSet set;
    std::vector<double> numerator_coeffs;  // c_0..c_{m-2}

    double numerator(double x) const;
    Complex numerator(Complex z) const;
    // residual of gap condition i (dense quadrature), for diagnostics
    double gap_residual(int gap) const;
};

// Tabulated cumulative distribution of the equilibrium measure.
struct EquilibriumCDF {
    struct BandTable {
        double a = 0, b = 0;
        double mass = 0;
        std::vector<double> cum;  // cumulative mass on a uniform theta grid
    };
    std::vector<BandTable> bands;
    double total_mass() const;
    double cdf(double x) const;            // mass of (-inf, x]
    double quantile(double level) const;   // inverse, level in [0, total]
};

GreenParams solve_gap_params(const IntervalSet& E);

// Green's function g_E(z) with pole at infinity: harmonic off E, zero on E,
// log|z| growth. Values for Im z < 0 by reflection.
double green_value(const GreenParams& params, Complex z);

EquilibriumCDF equilibrium_cdf(const GreenParams& params);

// n equilibrium-measure quantiles at equispaced levels j/(n-1); the first and
// last land on min E and max E.
std::vector<double> fejer_points(const GreenParams& params, int n);
std::vector<double> fejer_points(const GreenParams& params, const EquilibriumCDF& cdf, int n);

// Greedy log-product maximisation on a per-band cosine grid, seeded at max E.
std::vector<double> leja_points(const GreenParams& params, int n, int grid_resolution = 2048);

// Predicted asymptotic rate for polynomial approximation of obs on E:
// g_E at the nearest singularity of obs.
double asymptotic_rate(const GreenParams& params, const Observable& obs);

// Logarithmic capacity via the equilibrium potential at a probe point in E.
double capacity(const GreenParams& params);

}  // namespace tb
