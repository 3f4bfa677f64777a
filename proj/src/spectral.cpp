#include "tb/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace tb {

Observable Observable::fermi_dirac(double beta, double mu) {
    if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
    Observable o;
    o.kind_ = Kind::FermiDirac;
    o.beta_ = beta;
    o.mu_ = mu;
    return o;
}

Observable Observable::grand_potential(double beta, double mu) {
    if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
    Observable o;
    o.kind_ = Kind::GrandPotential;
    o.beta_ = beta;
    o.mu_ = mu;
    return o;
}

Observable Observable::resolvent(Complex pole) {
    if (pole.imag() == 0.0) throw std::invalid_argument("resolvent pole must be off the real axis");
    Observable o;
    o.kind_ = Kind::Resolvent;
    o.pole_ = pole;
    return o;
}

Observable Observable::polynomial(std::vector<double> coefficients) {
    Observable o;
    o.kind_ = Kind::Polynomial;
    o.coeffs_ = std::move(coefficients);
    if (o.coeffs_.empty()) o.coeffs_.push_back(0.0);
    return o;
}

Complex Observable::singularity_anchor() const {
    switch (kind_) {
        case Kind::FermiDirac:
        case Kind::GrandPotential:
            if (sharp()) return Complex(mu_, 0.0);
            return Complex(mu_, M_PI / beta_);
        case Kind::Resolvent:
            return pole_;
        case Kind::Polynomial:
            throw std::logic_error("polynomial observable has no singularity");
    }
    throw std::logic_error("unreachable");
}

namespace {

// Fermi factor in the overflow-safe split form.
Complex fermi_core(Complex x) {
    if (x.real() > 0) {
        const Complex e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

Complex Observable::operator()(Complex z) const {
    switch (kind_) {
        case Kind::FermiDirac: {
            if (sharp()) {
                if (std::abs(z.imag()) > 1e-14)
                    throw std::domain_error("sharp Fermi-Dirac defined on the real axis only");
                const double x = z.real();
                if (x < mu_) return 1.0;
                if (x > mu_) return 0.0;
                return 0.5;
            }
            // poles at mu + i pi (2k+1)/beta
            const double dist_re = std::abs(z.real() - mu_);
            const double period = 2.0 * M_PI / beta_;
            const double y = z.imag();
            const double off = std::abs(std::remainder(y - M_PI / beta_, period));
            if (dist_re < 1e-10 && off < 1e-10)
                throw std::domain_error("evaluation within 1e-10 of a Fermi-Dirac pole");
            return fermi_core(beta_ * (z - mu_));
        }
        case Kind::GrandPotential: {
            if (sharp()) {
                if (std::abs(z.imag()) > 1e-14)
                    throw std::domain_error("sharp grand potential defined on the real axis only");
                const double x = z.real();
                return (x < mu_) ? 2.0 * (x - mu_) : 0.0;
            }
            // branch cut {mu + i r : |r| >= pi/beta}
            if (std::abs(z.real() - mu_) < 1e-10 && std::abs(z.imag()) >= M_PI / beta_ - 1e-10)
                throw std::domain_error("evaluation within 1e-10 of the grand-potential branch cut");
            // (2/beta) log(1 - F(z)) = -(2/beta) log(1 + exp(-beta(z-mu)))
            const Complex x = beta_ * (z - mu_);
            Complex val;
            if (x.real() > 0) {
                val = std::log(1.0 + std::exp(-x));
            } else {
                val = -x + std::log(1.0 + std::exp(x));
            }
            return -(2.0 / beta_) * val;
        }
        case Kind::Resolvent:
            return 1.0 / (pole_ - z);
        case Kind::Polynomial: {
            Complex acc = 0.0;
            for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

double Observable::derivative(double x) const {
    switch (kind_) {
        case Kind::FermiDirac: {
            if (sharp()) {
                if (std::abs(x - mu_) < 1e-12)
                    throw std::domain_error("sharp Fermi-Dirac is not differentiable at mu");
                return 0.0;
            }
            const double f = fermi_core(Complex(beta_ * (x - mu_), 0)).real();
            return -beta_ * f * (1.0 - f);
        }
        case Kind::GrandPotential: {
            if (sharp()) {
                if (std::abs(x - mu_) < 1e-12)
                    throw std::domain_error("sharp grand potential is not differentiable at mu");
                return (x < mu_) ? 2.0 : 0.0;
            }
            // d/dz (2/beta) log(1 - F) = 2 F(z)
            return 2.0 * fermi_core(Complex(beta_ * (x - mu_), 0)).real();
        }
        case Kind::Resolvent:
            return (1.0 / ((pole_ - x) * (pole_ - x))).real();
        case Kind::Polynomial: {
            double acc = 0.0;
            for (std::size_t j = coeffs_.size(); j-- > 1;)
                acc = acc * x + static_cast<double>(j) * coeffs_[j];
            return acc;
        }
    }
    throw std::logic_error("unreachable");
}

EigenDecomposition eig(const Eigen::MatrixXd& H) {
    if (!H.allFinite()) throw std::invalid_argument("Hamiltonian has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    EigenDecomposition ed;
    ed.eigenvalues = solver.eigenvalues();
    ed.eigenvectors = solver.eigenvectors();
    // sign convention: first nonzero component of each eigenvector positive
    for (Eigen::Index s = 0; s < ed.eigenvectors.cols(); ++s) {
        for (Eigen::Index i = 0; i < ed.eigenvectors.rows(); ++i) {
            const double v = ed.eigenvectors(i, s);
            if (std::abs(v) > 1e-13) {
                if (v < 0) ed.eigenvectors.col(s) *= -1.0;
                break;
            }
        }
    }
    return ed;
}

double local_observable(const EigenDecomposition& ed, const Observable& obs, std::size_t l) {
    if (static_cast<Eigen::Index>(l) >= ed.eigenvectors.rows())
        throw std::out_of_range("site index out of range");
    if (obs.sharp()) {
        for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s)
            if (std::abs(ed.eigenvalues(s) - obs.mu()) < 1e-12)
                throw std::domain_error("chemical potential collides with an eigenvalue at beta = infinity");
    }
    double acc = 0.0;
    for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s) {
        const double w = ed.eigenvectors(static_cast<Eigen::Index>(l), s);
        acc += obs(ed.eigenvalues(s)) * w * w;
    }
    return acc;
}

std::vector<double> moments(const Eigen::MatrixXd& H, std::size_t l, int n_max) {
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    if (static_cast<Eigen::Index>(l) >= H.rows()) throw std::out_of_range("site index out of range");
    std::vector<double> m(static_cast<std::size_t>(n_max) + 1);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(H.rows());
    v(static_cast<Eigen::Index>(l)) = 1.0;
    m[0] = 1.0;
    for (int k = 1; k <= n_max; ++k) {
        v = H * v;
        m[static_cast<std::size_t>(k)] = v(static_cast<Eigen::Index>(l));
    }
    return m;
}

double SpectralMeasure::moment(int k) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < locations.size(); ++i) acc += weights[i] * std::pow(locations[i], k);
    return acc;
}

SpectralMeasure ldos(const EigenDecomposition& ed, std::size_t l) {
    SpectralMeasure d;
    for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s) {
        const double w = ed.eigenvectors(static_cast<Eigen::Index>(l), s);
        d.locations.push_back(ed.eigenvalues(s));
        d.weights.push_back(w * w);
    }
    return d;
}

SpectrumSummary summarize_spectrum(const EigenDecomposition& ed_reference,
                                   const EigenDecomposition& ed, double mu, double pad,
                                   bool require_gap) {
    const auto& ref = ed_reference.eigenvalues;
    double lo_max = -std::numeric_limits<double>::infinity();
    double hi_min = std::numeric_limits<double>::infinity();
    double lo_min = std::numeric_limits<double>::infinity();
    double hi_max = -std::numeric_limits<double>::infinity();
    bool have_lo = false, have_hi = false;
    for (Eigen::Index s = 0; s < ref.size(); ++s) {
        const double x = ref(s);
        if (std::abs(x - mu) < 1e-12) {
            if (require_gap) throw std::runtime_error("metallic reference: eigenvalue at the chemical potential");
        }
        if (x <= mu) {
            have_lo = true;
            lo_max = std::max(lo_max, x);
            lo_min = std::min(lo_min, x);
        } else {
            have_hi = true;
            hi_min = std::min(hi_min, x);
            hi_max = std::max(hi_max, x);
        }
    }
    if (!have_lo || !have_hi)
        throw std::runtime_error("chemical potential does not separate the reference spectrum");

    SpectrumSummary sum;
    sum.mu = mu;
    // pad on the outer side only; the inner (gap) edges stay at the bands
    sum.i_minus_lo = lo_min - pad;
    sum.i_minus_hi = lo_max;
    sum.i_plus_lo = hi_min;
    sum.i_plus_hi = hi_max + pad;
    sum.gap = sum.i_plus_lo - sum.i_minus_hi;
    if (require_gap && !(sum.gap > 0)) throw std::runtime_error("metallic reference: no gap at the chemical potential");

    // "strictly outside" with a numerical slack so that reference levels
    // sitting exactly on a band edge are not misclassified
    const double slack = 1e-12 * std::max(1.0, sum.i_plus_hi - sum.i_minus_lo);
    double below = sum.i_minus_hi, above = sum.i_plus_lo;
    for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s) {
        const double x = ed.eigenvalues(s);
        const bool inside = (x >= sum.i_minus_lo - slack && x <= sum.i_minus_hi + slack) ||
                            (x >= sum.i_plus_lo - slack && x <= sum.i_plus_hi + slack);
        if (!inside) {
            sum.defect_eigenvalues.push_back(x);
            if (x <= mu) below = std::max(below, x);
            else above = std::min(above, x);
        }
    }
    sum.gap_def = above - below;
    return sum;
}

double divided_difference(const Observable& obs, double a, double b, double scale) {
    if (std::abs(a - b) < 1e-8 * std::max(1.0, scale)) return obs.derivative(0.5 * (a + b));
    return (obs(a) - obs(b)) / (a - b);
}

double observable_derivative(const EigenDecomposition& ed, const Observable& obs,
                             std::size_t l, const Eigen::MatrixXd& dH) {
    const Eigen::Index n = ed.eigenvalues.size();
    const double scale = ed.operator_norm();
    // M_{st} = psi_s^T dH psi_t
    const Eigen::MatrixXd M = ed.eigenvectors.transpose() * dH * ed.eigenvectors;
    double acc = 0.0;
    const auto li = static_cast<Eigen::Index>(l);
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index t = 0; t < n; ++t) {
            const double w = ed.eigenvectors(li, s) * ed.eigenvectors(li, t);
            if (w == 0.0 && M(s, t) == 0.0) continue;
            acc += w * divided_difference(obs, ed.eigenvalues(s), ed.eigenvalues(t), scale) * M(s, t);
        }
    }
    return acc;
}

double observable_derivative_position(const Configuration& config, const HoppingModel& model,
                                      const EigenDecomposition& ed, const Observable& obs,
                                      std::size_t l, std::size_t m, int component) {
    return observable_derivative(ed, obs, l, position_derivative(config, model, m, component));
}

double observable_derivative_potential(const EigenDecomposition& ed, const Observable& obs,
                                       std::size_t l, std::size_t m) {
    return observable_derivative(ed, obs, l,
                                 potential_derivative(static_cast<std::size_t>(ed.eigenvalues.size()), m));
}

}  // namespace tb
