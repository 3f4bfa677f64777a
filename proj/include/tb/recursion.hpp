#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "tb/spectral.hpp"

namespace tb {

// Recursion coefficients (a_n, b_n) of the semi-infinite chain representation
// of a local spectral measure; K+1 levels, all b_n > 0.
struct JacobiMatrix {
    std::vector<double> a;  // a_0..a_K
    std::vector<double> b;  // b_1..b_K
    bool truncated = false; // Lanczos hit an invariant subspace early

    int levels() const { return static_cast<int>(a.size()) - 1; }
    Eigen::MatrixXd dense() const;
};

struct QuadratureRule {
    std::vector<double> nodes;    // ascending
    std::vector<double> weights;  // positive, unit sum
};

struct Terminator {
    enum class Kind { Vacuum, SquareRoot };
    Kind kind = Kind::Vacuum;
    double a_inf = 0.0;
    double b_inf = 0.0;

    static Terminator vacuum() { return {}; }
    static Terminator square_root(double a_inf, double b_inf);
    // far-field coefficients fitted as the mean of the last three levels
    static Terminator square_root_fit(const JacobiMatrix& J);

    Complex tail(Complex z) const;
};

// Three-term recurrence started at the unit vector of site l, with full
// reorthogonalisation; stops early (flagged) on an invariant subspace.
JacobiMatrix lanczos(const Eigen::MatrixXd& H, std::size_t l, int K);
inline JacobiMatrix lanczos(const Hamiltonian& H, std::size_t l, int K) {
    return lanczos(H.matrix, l, K);
}

// Gauss rule of the measure: nodes are the eigenvalues of the tridiagonal
// matrix, weights the squared first eigenvector components.
QuadratureRule gauss_rule(const JacobiMatrix& J);

// Nonlinear body-ordered estimate: integral of obs against the Gauss rule.
double theta(const JacobiMatrix& J, const Observable& obs);

// Continued-fraction resolvent [(z - H)^{-1}]_{ll} with the given tail.
Complex cf_resolvent(const JacobiMatrix& J, Complex z, const Terminator& term);

// Recursion coefficients from raw moments m[0..2K+1] (m[0] = 1); documented
// as ill-conditioned beyond K of about 10 in double precision.
JacobiMatrix jacobi_from_moments(const std::vector<double>& m);

// two-column CSV (a_n, b_n); b_0 is written as 0 and ignored on read
void write_jacobi_csv(std::ostream& out, const JacobiMatrix& J);
JacobiMatrix read_jacobi_csv(std::istream& in);

}  // namespace tb
