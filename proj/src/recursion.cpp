#include "tb/recursion.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tb {

Eigen::MatrixXd JacobiMatrix::dense() const {
    const auto n = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        T(i, i) = a[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            T(i, i + 1) = b[static_cast<std::size_t>(i)];
            T(i + 1, i) = b[static_cast<std::size_t>(i)];
        }
    }
    return T;
}

JacobiMatrix lanczos(const Eigen::MatrixXd& H, std::size_t l, int K) {
    const Eigen::Index n = H.rows();
    if (K < 0 || K + 1 > n) throw std::invalid_argument("Lanczos depth exceeds matrix dimension");
    if (static_cast<Eigen::Index>(l) >= n) throw std::out_of_range("start site out of range");
    const double hnorm = H.cwiseAbs().rowwise().sum().maxCoeff();  // cheap upper bound

    JacobiMatrix J;
    Eigen::MatrixXd V(n, K + 1);
    V.col(0).setZero();
    V(static_cast<Eigen::Index>(l), 0) = 1.0;

    for (int k = 0; k <= K; ++k) {
        Eigen::VectorXd w = H * V.col(k);
        const double ak = V.col(k).dot(w);
        J.a.push_back(ak);
        if (k == K) break;
        w -= ak * V.col(k);
        if (k > 0) w -= J.b[static_cast<std::size_t>(k - 1)] * V.col(k - 1);
        // full reorthogonalisation, two passes
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j <= k; ++j) w -= (V.col(j).dot(w)) * V.col(j);
        const double bk = w.norm();
        if (bk < 1e-13 * std::max(hnorm, 1.0)) {
            J.truncated = true;
            break;
        }
        J.b.push_back(bk);
        V.col(k + 1) = w / bk;
    }
    return J;
}

QuadratureRule gauss_rule(const JacobiMatrix& J) {
    for (double bn : J.b)
        if (!(bn > 0)) throw std::invalid_argument("Jacobi off-diagonal must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(J.dense());
    if (solver.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolve failed");
    QuadratureRule q;
    const Eigen::Index n = solver.eigenvalues().size();
    for (Eigen::Index j = 0; j < n; ++j) {
        q.nodes.push_back(solver.eigenvalues()(j));
        const double w0 = solver.eigenvectors()(0, j);
        q.weights.push_back(w0 * w0);
    }
    const double span = q.nodes.back() - q.nodes.front();
    for (std::size_t j = 0; j + 1 < q.nodes.size(); ++j)
        if (q.nodes[j + 1] - q.nodes[j] < 1e-10 * std::max(span, 1e-300))
            throw std::runtime_error("degenerate quadrature nodes");
    return q;
}

double theta(const JacobiMatrix& J, const Observable& obs) {
    const QuadratureRule q = gauss_rule(J);
    if (obs.sharp()) {
        const double span = std::max(q.nodes.back() - q.nodes.front(), 1e-300);
        for (double node : q.nodes)
            if (std::abs(node - obs.mu()) < 1e-12 * span)
                throw std::domain_error("quadrature node collides with the observable singularity");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < q.nodes.size(); ++j) acc += q.weights[j] * obs(q.nodes[j]);
    return acc;
}

Terminator Terminator::square_root(double a_inf, double b_inf) {
    if (!(b_inf > 0)) throw std::invalid_argument("square-root terminator needs b_inf > 0");
    Terminator t;
    t.kind = Kind::SquareRoot;
    t.a_inf = a_inf;
    t.b_inf = b_inf;
    return t;
}

Terminator Terminator::square_root_fit(const JacobiMatrix& J) {
    if (J.b.empty()) throw std::invalid_argument("cannot fit a terminator without off-diagonal coefficients");
    const std::size_t na = std::min<std::size_t>(3, J.a.size());
    const std::size_t nb = std::min<std::size_t>(3, J.b.size());
    double a_acc = 0.0, b_acc = 0.0;
    for (std::size_t i = J.a.size() - na; i < J.a.size(); ++i) a_acc += J.a[i];
    for (std::size_t i = J.b.size() - nb; i < J.b.size(); ++i) b_acc += J.b[i];
    return square_root(a_acc / static_cast<double>(na), b_acc / static_cast<double>(nb));
}

Complex Terminator::tail(Complex z) const {
    if (kind == Kind::Vacuum) return 0.0;
    const Complex zeta = z - a_inf;
    // branch with s ~ zeta at infinity; cut on the band [a_inf-2b, a_inf+2b]
    Complex s = std::sqrt(zeta - 2.0 * b_inf) * std::sqrt(zeta + 2.0 * b_inf);
    Complex t = 0.5 * (zeta - s);
    if (z.imag() != 0.0 && t.imag() * z.imag() > 0.0) t = 0.5 * (zeta + s);
    return t;
}

Complex cf_resolvent(const JacobiMatrix& J, Complex z, const Terminator& term) {
    const int K = J.levels();
    Complex d = z - J.a[static_cast<std::size_t>(K)] - term.tail(z);
    for (int n = K - 1; n >= 0; --n) {
        if (d == 0.0) throw std::runtime_error("continued fraction pole hit exactly");
        d = z - J.a[static_cast<std::size_t>(n)] -
            J.b[static_cast<std::size_t>(n)] * J.b[static_cast<std::size_t>(n)] / d;
    }
    if (d == 0.0) throw std::runtime_error("continued fraction pole hit exactly");
    return 1.0 / d;
}

JacobiMatrix jacobi_from_moments(const std::vector<double>& m) {
    if (m.size() < 2 || m.size() % 2 != 0)
        throw std::invalid_argument("need moments m_0..m_{2K+1} (even count)");
    if (std::abs(m[0] - 1.0) > 1e-12) throw std::invalid_argument("m_0 must equal 1 (unit measure)");
    const int K = static_cast<int>(m.size() / 2) - 1;

    auto mom = [&](const std::vector<double>& poly) {
        double acc = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i) acc += poly[i] * m[i];
        return acc;
    };
    auto mul_x = [](const std::vector<double>& p) {
        std::vector<double> q(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) q[i + 1] = p[i];
        return q;
    };
    auto square = [](const std::vector<double>& p) {
        std::vector<double> q(2 * p.size() - 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j) q[i + j] += p[i] * p[j];
        return q;
    };
    auto axpy = [](std::vector<double>& y, double alpha, const std::vector<double>& x) {
        if (y.size() < x.size()) y.resize(x.size(), 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
    };

    JacobiMatrix J;
    // renormalised polynomials P_n = b_n p_n with b_0 = 1
    std::vector<double> P_prev{1.0};
    J.a.push_back(m[1]);
    if (K == 0) return J;
    std::vector<double> P_cur{-m[1], 1.0};
    double b_prev = 1.0;

    for (int n = 1; n <= K; ++n) {
        const double b2 = mom(square(P_cur));
        if (!(b2 > 0)) {
            throw std::runtime_error("moment sequence not positive-definite at level " + std::to_string(n));
        }
        const double bn = std::sqrt(b2);
        J.b.push_back(bn);
        const double an = mom(mul_x(square(P_cur))) / b2;
        J.a.push_back(an);
        if (n == K) break;
        // P_{n+1} = ((x - a_n)/b_n) P_n - (b_n/b_{n-1}) P_{n-1}
        std::vector<double> next = mul_x(P_cur);
        axpy(next, -an, P_cur);
        for (auto& c : next) c /= bn;
        axpy(next, -bn / b_prev, P_prev);
        P_prev = std::move(P_cur);
        P_cur = std::move(next);
        b_prev = bn;
    }
    return J;
}

void write_jacobi_csv(std::ostream& out, const JacobiMatrix& J) {
    char buf[96];
    for (std::size_t i = 0; i < J.a.size(); ++i) {
        const double b = (i == 0) ? 0.0 : J.b[i - 1];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", J.a[i], b);
        out << buf << "\n";
    }
}

JacobiMatrix read_jacobi_csv(std::istream& in) {
    JacobiMatrix J;
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("Jacobi CSV rows need two columns");
        J.a.push_back(std::stod(line.substr(0, comma)));
        if (!J.a.empty() && J.a.size() > 1) J.b.push_back(std::stod(line.substr(comma + 1)));
    }
    if (J.a.empty()) throw std::invalid_argument("Jacobi CSV contains no rows");
    return J;
}

}  // namespace tb
