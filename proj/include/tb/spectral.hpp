#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <vector>

#include "tb/lattice.hpp"

namespace tb {

using Complex = std::complex<double>;

constexpr double kBetaInfinite = std::numeric_limits<double>::infinity();

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // orthonormal columns, sign-fixed
    double operator_norm() const {
        return std::max(std::abs(eigenvalues(0)), std::abs(eigenvalues(eigenvalues.size() - 1)));
    }
};

// Scalar observable O(z) together with its singularity geometry.
// FermiDirac and GrandPotential support beta = infinity (sharp step).
class Observable {
  public:
    enum class Kind { FermiDirac, GrandPotential, Resolvent, Polynomial };

    static Observable fermi_dirac(double beta, double mu);
    static Observable grand_potential(double beta, double mu);
    static Observable resolvent(Complex pole);
    static Observable polynomial(std::vector<double> coefficients);

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    double mu() const { return mu_; }
    bool sharp() const { return beta_ == kBetaInfinite; }

    // Nearest non-analyticity: mu + i pi/beta for the thermal kinds (mu itself
    // at beta = infinity), the pole for Resolvent. Throws for Polynomial.
    Complex singularity_anchor() const;
    bool has_singularity() const { return kind_ != Kind::Polynomial; }

    Complex operator()(Complex z) const;
    double operator()(double x) const { return (*this)(Complex(x, 0)).real(); }
    // d/dz of the observable on the real axis.
    double derivative(double x) const;

  private:
    Kind kind_;
    double beta_ = kBetaInfinite;
    double mu_ = 0.0;
    Complex pole_{0, 0};
    std::vector<double> coeffs_;
};

struct SpectrumSummary {
    double i_minus_lo = 0, i_minus_hi = 0;  // I_-
    double i_plus_lo = 0, i_plus_hi = 0;    // I_+
    std::vector<double> defect_eigenvalues; // strictly outside I_- U I_+
    double gap = 0;        // min I_+ - max I_-
    double gap_def = 0;    // gap after counting defect levels
    double mu = 0;
};

struct SpectralMeasure {
    std::vector<double> locations;
    std::vector<double> weights;
    double moment(int k) const;
};

EigenDecomposition eig(const Eigen::MatrixXd& H);
inline EigenDecomposition eig(const Hamiltonian& H) { return eig(H.matrix); }

// O_l = sum_s O(lambda_s) |psi_{s,l}|^2
double local_observable(const EigenDecomposition& ed, const Observable& obs, std::size_t l);

// m_k = [H^k]_{ll} for k = 0..n_max (m_0 = 1), by repeated mat-vec.
std::vector<double> moments(const Eigen::MatrixXd& H, std::size_t l, int n_max);
inline std::vector<double> moments(const Hamiltonian& H, std::size_t l, int n_max) {
    return moments(H.matrix, l, n_max);
}

SpectralMeasure ldos(const EigenDecomposition& ed, std::size_t l);

SpectrumSummary summarize_spectrum(const EigenDecomposition& ed_reference,
                                   const EigenDecomposition& ed, double mu, double pad,
                                   bool require_gap = true);

// Divided difference of obs: (O(a)-O(b))/(a-b), O'(a) on the near-diagonal.
double divided_difference(const Observable& obs, double a, double b, double scale);

// d O_l / d theta where dH is the analytic derivative of the Hamiltonian with
// respect to the parameter theta (position component or on-site potential).
double observable_derivative(const EigenDecomposition& ed, const Observable& obs,
                             std::size_t l, const Eigen::MatrixXd& dH);

double observable_derivative_position(const Configuration& config, const HoppingModel& model,
                                      const EigenDecomposition& ed, const Observable& obs,
                                      std::size_t l, std::size_t m, int component);
double observable_derivative_potential(const EigenDecomposition& ed, const Observable& obs,
                                       std::size_t l, std::size_t m);

}  // namespace tb
