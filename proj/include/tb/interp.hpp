#pragma once

#include <iosfwd>
#include <vector>

#include "tb/lattice.hpp"
#include "tb/spectral.hpp"

namespace tb {

// Interpolation nodes with barycentric weights kept in log form so that
// node counts of a few hundred on small intervals stay representable.
class InterpolationSet {
  public:
    static InterpolationSet build(std::vector<double> nodes);

    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    std::vector<double> values_of(const Observable& obs) const;

    double eval(const std::vector<double>& values, double x) const;
    Complex eval(const std::vector<double>& values, Complex z) const;
    // derivative of the interpolant (exact at nodes and between them)
    double eval_derivative(const std::vector<double>& values, double x) const;

  private:
    std::vector<double> nodes_;
    std::vector<double> log_w_;
    std::vector<double> sign_w_;
    double span_ = 0;
};

// I_X O applied through the spectral decomposition:
// sum_s (I_X obs)(lambda_s) |psi_{s,l}|^2.
double matrix_interpolant(const EigenDecomposition& ed, const InterpolationSet& X,
                          const Observable& obs, std::size_t l);

// First-kind Chebyshev series on an interval [a,b].
struct ChebSeries {
    double a = -1, b = 1;
    std::vector<double> coeffs;
    double eval(double x) const;
    Complex eval(Complex z) const;
};

ChebSeries cheb_project(const Observable& obs, int N, double a, double b);
ChebSeries cheb_interp(const Observable& obs, int N, double a, double b);

struct DampingKernel {
    enum class Kind { None, Fejer, Jackson };
    Kind kind = Kind::None;
    double coefficient(int n, int order) const;
    static DampingKernel none() { return {Kind::None}; }
    static DampingKernel fejer() { return {Kind::Fejer}; }
    static DampingKernel jackson() { return {Kind::Jackson}; }
};

// Damped Chebyshev-moment estimate of the local observable; the spectrum is
// mapped into [-1+delta, 1-delta] via Gershgorin bounds internally.
double kpm_estimate(const Eigen::MatrixXd& H, std::size_t l, const Observable& obs, int order,
                    const DampingKernel& kernel);

// (|K|+1)-body component V_{|K|,N} of the interpolation scheme:
// inclusion-exclusion over sub-clusters of K around the centre site.
double body_order_component(const Configuration& config, const HoppingModel& model,
                            const InterpolationSet& X, const Observable& obs,
                            std::size_t l, const std::vector<std::size_t>& K);

// Vacuum cluster expansion: exact-observable analogue of the above.
double vacuum_potential(const Configuration& config, const HoppingModel& model,
                        const Observable& obs, std::size_t l, const std::vector<std::size_t>& K);

double vacuum_sum(const Configuration& config, const HoppingModel& model, const Observable& obs,
                  std::size_t l, int body_order);

// j-th moment of the vacuum-expansion measure: path sum over index tuples
// visiting at most body_order distinct sites.
double vacuum_moment(const Configuration& config, const HoppingModel& model, std::size_t l,
                     int j, int body_order);

// single-column node-set CSV; '#' lines are comments
void write_nodes_csv(std::ostream& out, const std::vector<double>& nodes);
std::vector<double> read_nodes_csv(std::istream& in);

}  // namespace tb
