#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "tb/recursion.hpp"

using namespace tb;

TEST_CASE("Lanczos on trivial systems") {
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    const JacobiMatrix j1 = lanczos(one, 0, 0);
    REQUIRE(j1.a.size() == 1);
    CHECK(j1.a[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(j1.b.empty());

    Eigen::MatrixXd dimer(2, 2);
    const double h = std::exp(-1.0);
    dimer << 0, h, h, 0;
    const JacobiMatrix j2 = lanczos(dimer, 0, 1);
    REQUIRE(j2.a.size() == 2);
    REQUIRE(j2.b.size() == 1);
    CHECK(std::abs(j2.a[0]) < 1e-15);
    CHECK(std::abs(j2.a[1]) < 1e-15);
    CHECK(j2.b[0] == doctest::Approx(h).epsilon(1e-14));

    CHECK_THROWS_AS(lanczos(dimer, 0, 3), std::invalid_argument);
}

TEST_CASE("truncated Jacobi matrix reproduces all reachable moments") {
    const Eigen::MatrixXd H = assemble(make_chain(12, 1.0, {0.3, -0.3}), tbtest::unit_model()).matrix;
    const std::size_t l = 5;
    const JacobiMatrix J = lanczos(H, l, 5);
    const auto m = moments(H, l, 11);
    const auto tm = moments(J.dense(), 0, 11);
    const double hnorm = H.operatorNorm();
    for (int k = 0; k <= 11; ++k)
        CHECK(std::abs(tm[static_cast<std::size_t>(k)] - m[static_cast<std::size_t>(k)]) <=
              1e-9 * std::max(1.0, std::pow(hnorm, k)));
}

TEST_CASE("early termination on an invariant subspace is flagged") {
    // decoupled dimer inside a larger matrix: the Krylov space has dimension 2
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(5, 5);
    H(0, 1) = H(1, 0) = 0.4;
    H(2, 3) = H(3, 2) = 0.9;
    const JacobiMatrix J = lanczos(H, 0, 4);
    CHECK(J.truncated);
    CHECK(J.a.size() == 2);
}

TEST_CASE("Gauss rule on trivial systems") {
    JacobiMatrix j1;
    j1.a = {0.7};
    const QuadratureRule q1 = gauss_rule(j1);
    REQUIRE(q1.nodes.size() == 1);
    CHECK(q1.nodes[0] == doctest::Approx(0.7));
    CHECK(q1.weights[0] == doctest::Approx(1.0));

    JacobiMatrix j2;
    const double h = std::exp(-1.0);
    j2.a = {0.0, 0.0};
    j2.b = {h};
    const QuadratureRule q2 = gauss_rule(j2);
    REQUIRE(q2.nodes.size() == 2);
    CHECK(q2.nodes[0] == doctest::Approx(-h).epsilon(1e-14));
    CHECK(q2.nodes[1] == doctest::Approx(h).epsilon(1e-14));
    CHECK(q2.weights[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(q2.weights[1] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("Gauss rule integrates random polynomials of degree 2K+1 exactly") {
    const Eigen::MatrixXd H = assemble(make_chain(12, 1.0, {0.2, -0.2}), tbtest::unit_model()).matrix;
    const std::size_t l = 4;
    const int K = 5;
    const QuadratureRule q = gauss_rule(lanczos(H, l, K));
    auto gen = tbtest::rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double hnorm = H.operatorNorm();
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> coeffs(2 * K + 2);
        for (auto& c : coeffs) c = u(gen);
        const Observable poly = Observable::polynomial(coeffs);
        double quad = 0.0;
        for (std::size_t j = 0; j < q.nodes.size(); ++j) quad += q.weights[j] * poly(q.nodes[j]);
        const double exact = local_observable(eig(H), poly, l);
        CHECK(std::abs(quad - exact) <= 1e-9 * std::max(1.0, std::pow(hnorm, 2 * K + 1)));
    }
}

TEST_CASE("theta with a full-depth recursion equals the exact observable") {
    const Eigen::MatrixXd H = assemble(make_chain(9, 1.0, {0.35, -0.35}), tbtest::unit_model()).matrix;
    const Observable fd = Observable::fermi_dirac(50.0, 0.0);
    const std::size_t l = 4;
    const double exact = local_observable(eig(H), fd, l);
    CHECK(theta(lanczos(H, l, 8), fd) == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("theta is exact for polynomials within the moment budget") {
    const Eigen::MatrixXd H = assemble(make_chain(10, 1.0, {0.1}), tbtest::unit_model()).matrix;
    const int K = 3;
    const Observable poly = Observable::polynomial({0.2, -0.5, 0.1, 0.7, -0.2, 0.05, 0.3, -0.1});  // degree 7
    const double exact = local_observable(eig(H), poly, 2);
    CHECK(theta(lanczos(H, 2, K), poly) == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("theta error decays with depth on a gapped chain") {
    const Eigen::MatrixXd H = assemble(tbtest::gapped_chain(30), tbtest::gapped_model()).matrix;
    const Observable sharp = Observable::fermi_dirac(kBetaInfinite, 0.0);
    const std::size_t l = 14;
    const double exact = local_observable(eig(H), sharp, l);
    const double e4 = std::abs(theta(lanczos(H, l, 4), sharp) - exact);
    const double e12 = std::abs(theta(lanczos(H, l, 12), sharp) - exact);
    CHECK(e12 < e4 * 2e-2);
}

TEST_CASE("vacuum-terminated continued fraction is the Gauss partial fraction") {
    const Eigen::MatrixXd H = assemble(make_chain(11, 1.0, {0.25, -0.25}), tbtest::unit_model()).matrix;
    const std::size_t l = 5;
    const JacobiMatrix J = lanczos(H, l, 6);
    const QuadratureRule q = gauss_rule(J);
    auto gen = tbtest::rng(5);
    std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.05, 1.5);
    for (int probe = 0; probe < 10; ++probe) {
        const Complex z(re(gen), im(gen));
        Complex pf = 0.0;
        for (std::size_t j = 0; j < q.nodes.size(); ++j) pf += q.weights[j] / (z - q.nodes[j]);
        const Complex cf = cf_resolvent(J, z, Terminator::vacuum());
        CHECK(std::abs(cf - pf) < 1e-10);
    }
    // K = 0 closed form
    JacobiMatrix j0;
    j0.a = {0.7};
    CHECK(std::abs(cf_resolvent(j0, Complex(1.5, 0.2), Terminator::vacuum()) -
                   1.0 / (Complex(1.5, 0.2) - 0.7)) < 1e-14);
}

TEST_CASE("square-root terminator on the constant chain recovers the arcsine shape") {
    JacobiMatrix J;
    J.a.assign(8, 0.0);
    J.b.assign(7, 0.5);
    const Terminator t = Terminator::square_root(0.0, 0.5);
    // density -Im G/pi on (-1,1): positive and of unit total mass
    const int cells = 2000;
    double mass = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double x = -1.0 + 2.0 * (i + 0.5) / cells;
        const double dens = -cf_resolvent(J, Complex(x, 1e-6), t).imag() / M_PI;
        CHECK(dens > 0.0);
        mass += dens * 2.0 / cells;
    }
    CHECK(std::abs(mass - 1.0) <= 1e-3);
}

TEST_CASE("resolvent stays Herglotz for both terminators") {
    const Eigen::MatrixXd H = assemble(make_chain(10, 1.0, {0.2, -0.2}), tbtest::unit_model()).matrix;
    const JacobiMatrix J = lanczos(H, 3, 6);
    const Terminator sq = Terminator::square_root_fit(J);
    auto gen = tbtest::rng(41);
    std::uniform_real_distribution<double> re(-3.0, 3.0), im(1e-4, 2.0);
    for (int probe = 0; probe < 100; ++probe) {
        const Complex z(re(gen), im(gen));
        CHECK(cf_resolvent(J, z, Terminator::vacuum()).imag() < 0.0);
        CHECK(cf_resolvent(J, z, sq).imag() < 0.0);
    }
}

TEST_CASE("quadrature nodes interlace between consecutive depths") {
    const Eigen::MatrixXd H = assemble(make_chain(14, 1.0, {0.3, -0.1}), tbtest::unit_model()).matrix;
    for (int K = 1; K <= 6; ++K) {
        const auto q0 = gauss_rule(lanczos(H, 6, K));
        const auto q1 = gauss_rule(lanczos(H, 6, K + 1));
        REQUIRE(q1.nodes.size() == q0.nodes.size() + 1);
        for (std::size_t j = 0; j < q0.nodes.size(); ++j) {
            CHECK(q1.nodes[j] < q0.nodes[j]);
            CHECK(q0.nodes[j] < q1.nodes[j + 1]);
        }
    }
}

TEST_CASE("weights are positive with unit mass at every depth") {
    const Eigen::MatrixXd H = assemble(tbtest::gapped_chain(40), tbtest::gapped_model()).matrix;
    for (int K : {1, 5, 10, 20, 30}) {
        const QuadratureRule q = gauss_rule(lanczos(H, 19, K));
        double mass = 0.0;
        for (double w : q.weights) {
            CHECK(w >= 0.0);
            mass += w;
        }
        CHECK(std::abs(mass - 1.0) <= 1e-12);
    }
}

TEST_CASE("at most one node falls inside a gap subinterval") {
    const Eigen::MatrixXd H = assemble(tbtest::gapped_chain(40), tbtest::gapped_model()).matrix;
    // inner gap of the pattern chain is about (-0.21, 0.21); probe well inside
    for (int K = 1; K <= 30; ++K) {
        const QuadratureRule q = gauss_rule(lanczos(H, 20, K));
        int inside = 0;
        for (double x : q.nodes)
            if (x >= -0.15 && x <= 0.15) ++inside;
        CHECK(inside <= 1);
    }
}

TEST_CASE("node-singularity collisions are rejected for sharp observables") {
    JacobiMatrix J;
    J.a = {0.0, 0.0};
    J.b = {0.5};
    const Observable clash = Observable::fermi_dirac(kBetaInfinite, 0.5);
    CHECK_THROWS_AS(theta(J, clash), std::domain_error);
}

TEST_CASE("full-depth continued fraction equals the exact resolvent entry") {
    const Eigen::MatrixXd H = assemble(make_chain(8, 1.0, {0.2, -0.2}), tbtest::unit_model()).matrix;
    const std::size_t l = 3;
    const JacobiMatrix J = lanczos(H, l, 7);
    const Observable res = Observable::resolvent(Complex(0.4, 0.3));
    // [(z - H)^{-1}]_{ll} through the spectral decomposition
    const double via_spectrum = local_observable(eig(H), res, l);
    const Complex via_cf = cf_resolvent(J, Complex(0.4, 0.3), Terminator::vacuum());
    CHECK(via_cf.real() == doctest::Approx(via_spectrum).epsilon(1e-10));
}

TEST_CASE("Jacobi coefficients survive the CSV round trip") {
    const Eigen::MatrixXd H = assemble(make_chain(9, 1.0, {0.3}), tbtest::unit_model()).matrix;
    const JacobiMatrix J = lanczos(H, 4, 6);
    std::stringstream ss;
    ss << "# recursion coefficients\n";
    write_jacobi_csv(ss, J);
    const JacobiMatrix back = read_jacobi_csv(ss);
    REQUIRE(back.a.size() == J.a.size());
    REQUIRE(back.b.size() == J.b.size());
    for (std::size_t i = 0; i < J.a.size(); ++i) CHECK(back.a[i] == J.a[i]);
    for (std::size_t i = 0; i < J.b.size(); ++i) CHECK(back.b[i] == J.b[i]);
}

TEST_CASE("moment-based construction matches Lanczos at moderate depth") {
    // trivial cases first
    const JacobiMatrix triv = jacobi_from_moments({1.0, 0.7});
    REQUIRE(triv.a.size() == 1);
    CHECK(triv.a[0] == doctest::Approx(0.7).epsilon(1e-14));

    const double h = std::exp(-1.0);
    const JacobiMatrix dim = jacobi_from_moments({1.0, 0.0, h * h, 0.0});
    REQUIRE(dim.b.size() == 1);
    CHECK(dim.b[0] == doctest::Approx(h).epsilon(1e-13));

    const Eigen::MatrixXd H = assemble(make_chain(12, 1.0, {0.3, -0.3}), tbtest::unit_model()).matrix;
    const std::size_t l = 5;
    for (int K : {4, 8}) {
        const auto m = moments(H, l, 2 * K + 1);
        const JacobiMatrix jm = jacobi_from_moments(m);
        const JacobiMatrix jl = lanczos(H, l, K);
        REQUIRE(jm.a.size() == jl.a.size());
        for (std::size_t i = 0; i < jm.a.size(); ++i) CHECK(std::abs(jm.a[i] - jl.a[i]) < 1e-6);
        for (std::size_t i = 0; i < jm.b.size(); ++i) CHECK(std::abs(jm.b[i] - jl.b[i]) < 1e-6);
    }

    // a non-measure moment sequence is detected
    CHECK_THROWS_WITH_AS(static_cast<void>(jacobi_from_moments({1.0, 0.0, -1.0, 0.0})),
                         doctest::Contains("not positive-definite"), std::runtime_error);
}
