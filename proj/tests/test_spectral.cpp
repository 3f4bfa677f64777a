#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "tb/lattice.hpp"
#include "tb/spectral.hpp"

using namespace tb;

namespace {

// brute-force path-sum oracle for [H^k]_{ll}
double path_sum_moment(const Eigen::MatrixXd& H, std::size_t l, int k) {
    const std::size_t n = static_cast<std::size_t>(H.rows());
    if (k == 0) return 1.0;
    double total = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(k) - 1, 0);
    while (true) {
        double w = 1.0;
        std::size_t prev = l;
        for (std::size_t i : idx) {
            w *= H(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(i));
            prev = i;
        }
        w *= H(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(l));
        total += w;
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == n) idx[pos++] = 0;
        if (pos == idx.size() && !idx.empty()) break;
        if (idx.empty()) break;
    }
    return total;
}

// characteristic polynomial coefficients via Faddeev-LeVerrier
std::vector<double> char_poly(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[static_cast<std::size_t>(n)] = 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        M = A * M + c[static_cast<std::size_t>(n - k + 1)] * Eigen::MatrixXd::Identity(n, n);
        c[static_cast<std::size_t>(n - k)] = -(A * M).trace() / static_cast<double>(k);
    }
    return c;  // p(x) = sum c_k x^k, monic
}

// roots of a monic polynomial via its companion matrix (general eigensolver)
std::vector<double> companion_roots(const std::vector<double>& c) {
    const auto deg = static_cast<Eigen::Index>(c.size()) - 1;
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (Eigen::Index i = 0; i + 1 < deg; ++i) comp(i + 1, i) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -c[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    std::vector<double> roots;
    for (Eigen::Index i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i).real());
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

TEST_CASE("eig on the trivial and dimer matrices") {
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    const auto ed1 = eig(one);
    CHECK(ed1.eigenvalues(0) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(ed1.eigenvectors(0, 0) == 1.0);

    Eigen::MatrixXd dimer(2, 2);
    const double h = std::exp(-1.0);
    dimer << 0, h, h, 0;
    const auto ed2 = eig(dimer);
    CHECK(ed2.eigenvalues(0) == doctest::Approx(-h).epsilon(1e-14));
    CHECK(ed2.eigenvalues(1) == doctest::Approx(h).epsilon(1e-14));
    // sign convention
    CHECK(ed2.eigenvectors(0, 0) > 0);
    CHECK(ed2.eigenvectors(0, 1) > 0);
}

TEST_CASE("gap of the pattern chain matches the companion-matrix oracle at n=6") {
    const Configuration c6 = tbtest::gapped_chain(6);
    const auto model = tbtest::gapped_model();
    const Eigen::MatrixXd H = assemble(c6, model).matrix;
    const auto ed = eig(H);
    const auto roots = companion_roots(char_poly(H));
    REQUIRE(roots.size() == 6);
    for (std::size_t i = 0; i < roots.size(); ++i)
        CHECK(ed.eigenvalues(static_cast<Eigen::Index>(i)) == doctest::Approx(roots[i]).epsilon(1e-7));
    // measure the gap constant once on the oracle, then check the 10-site chain
    double c_gap = 1e9;
    for (double r : roots) c_gap = std::min(c_gap, std::abs(r));
    const auto ed10 = eig(assemble(tbtest::gapped_chain(10), model));
    for (Eigen::Index s = 0; s < ed10.eigenvalues.size(); ++s)
        CHECK(std::abs(ed10.eigenvalues(s)) >= 0.5 * c_gap);
}

TEST_CASE("eigen decomposition satisfies residual and orthonormality bounds") {
    const Eigen::MatrixXd H = assemble(tbtest::gapped_chain(12), tbtest::gapped_model()).matrix;
    const auto ed = eig(H);
    const double hnorm = ed.operator_norm();
    for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s) {
        const double resid = (H * ed.eigenvectors.col(s) - ed.eigenvalues(s) * ed.eigenvectors.col(s)).norm();
        CHECK(resid <= 1e-10 * hnorm);
    }
    const Eigen::MatrixXd gram = ed.eigenvectors.transpose() * ed.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("observable evaluation matches the closed forms") {
    const Observable fd = Observable::fermi_dirac(100.0, 0.0);
    CHECK(fd(Complex(0.0, 0.0)).real() == doctest::Approx(0.5).epsilon(1e-15));

    const Observable sharp = Observable::fermi_dirac(kBetaInfinite, 0.0);
    CHECK(sharp(-0.3) == 1.0);
    CHECK(sharp(0.3) == 0.0);
    CHECK(sharp(0.0) == 0.5);

    const Observable gp = Observable::grand_potential(kBetaInfinite, 0.0);
    CHECK(gp(-0.4) == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK(gp(0.4) == 0.0);

    // stable far from mu at large beta
    const Observable fd_big = Observable::fermi_dirac(1e4, 0.0);
    CHECK(fd_big(5.0) < 1e-300);
    CHECK(fd_big(-5.0) == doctest::Approx(1.0).epsilon(1e-15));

    // finite-beta grand potential approaches the sharp ramp
    const Observable gp100 = Observable::grand_potential(100.0, 0.0);
    CHECK(gp100(-0.4) == doctest::Approx(-0.8).epsilon(1e-10));
}

TEST_CASE("resolvent observable sums to the exact resolvent entry") {
    const Eigen::MatrixXd H = assemble(make_chain(7, 1.0, {0.2, -0.2}), tbtest::unit_model()).matrix;
    const Complex z(0.3, 0.6);
    const Observable res = Observable::resolvent(z);
    const auto ed = eig(H);
    // direct dense solve of (z - H) x = e_l
    Eigen::MatrixXcd A = -H.cast<Complex>();
    A.diagonal().array() += z;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(7);
    rhs(2) = 1.0;
    const Complex direct = A.partialPivLu().solve(rhs)(2);
    // the observable is real on the real axis, so local_observable carries Re
    CHECK(local_observable(ed, res, 2) == doctest::Approx(direct.real()).epsilon(1e-12));
    CHECK(res.derivative(0.1) == doctest::Approx((1.0 / ((z - 0.1) * (z - 0.1))).real()).epsilon(1e-12));
    CHECK_THROWS_AS(Observable::resolvent(Complex(0.5, 0.0)), std::invalid_argument);
}

TEST_CASE("pole and branch-cut proximity raise explicit errors") {
    const Observable fd = Observable::fermi_dirac(10.0, 0.0);
    CHECK_THROWS_AS(fd(Complex(0.0, M_PI / 10.0)), std::domain_error);
    const Observable gp = Observable::grand_potential(10.0, 0.0);
    CHECK_THROWS_AS(gp(Complex(0.0, 2.0 * M_PI / 10.0)), std::domain_error);
    CHECK_NOTHROW(gp(Complex(0.5, 2.0 * M_PI / 10.0)));
}

TEST_CASE("local observable on trivial systems") {
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    const Observable sharp = Observable::fermi_dirac(kBetaInfinite, 0.0);
    CHECK(local_observable(eig(one), sharp, 0) == 0.0);

    Eigen::MatrixXd dimer(2, 2);
    const double h = std::exp(-1.0);
    dimer << 0, h, h, 0;
    CHECK(local_observable(eig(dimer), sharp, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("particle number equals the spectral sum of occupations") {
    const auto ed = eig(assemble(make_chain(10, 1.0, {0.2, -0.2}), tbtest::unit_model()));
    const Observable fd = Observable::fermi_dirac(100.0, 0.0);
    double by_sites = 0.0, by_levels = 0.0;
    for (std::size_t l = 0; l < 10; ++l) by_sites += local_observable(ed, fd, l);
    for (Eigen::Index s = 0; s < 10; ++s) by_levels += fd(ed.eigenvalues(s));
    CHECK(by_sites == doctest::Approx(by_levels).epsilon(1e-12));
}

TEST_CASE("mu colliding with an eigenvalue is rejected at beta = infinity") {
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    const Observable bad = Observable::fermi_dirac(kBetaInfinite, 0.7);
    CHECK_THROWS_AS(local_observable(eig(one), bad, 0), std::domain_error);
}

TEST_CASE("moments match the explicit path enumeration") {
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    CHECK(moments(one, 0, 1)[1] == doctest::Approx(0.7).epsilon(1e-15));

    Eigen::MatrixXd dimer(2, 2);
    const double h = std::exp(-1.0);
    dimer << 0, h, h, 0;
    CHECK(moments(dimer, 0, 2)[2] == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));

    const Eigen::MatrixXd H = assemble(make_chain(5, 1.0, {0.2, -0.1}), tbtest::unit_model()).matrix;
    const auto m = moments(H, 2, 6);
    for (int k = 0; k <= 6; ++k)
        CHECK(m[static_cast<std::size_t>(k)] ==
              doctest::Approx(path_sum_moment(H, 2, k)).epsilon(1e-11));
}

TEST_CASE("local spectral measure is a unit measure with matching moments") {
    const Eigen::MatrixXd H = assemble(make_chain(8, 1.0, {0.3, -0.3}), tbtest::unit_model()).matrix;
    const auto ed = eig(H);
    const auto d = ldos(ed, 3);
    double mass = 0.0;
    for (double w : d.weights) {
        CHECK(w >= 0.0);
        mass += w;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    const auto m = moments(H, 3, 8);
    const double hnorm = ed.operator_norm();
    for (int k = 0; k <= 8; ++k)
        CHECK(std::abs(d.moment(k) - m[static_cast<std::size_t>(k)]) <=
              1e-9 * std::max(1.0, std::pow(hnorm, k)));

    // single site and dimer atoms
    Eigen::MatrixXd one(1, 1);
    one << 0.7;
    const auto d1 = ldos(eig(one), 0);
    CHECK(d1.locations[0] == doctest::Approx(0.7));
    CHECK(d1.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("spectrum summary classifies defect levels and pads bands") {
    const auto model = tbtest::gapped_model();
    const auto ed_ref = eig(assemble(tbtest::gapped_chain(21), model));
    const auto ed_def = eig(assemble(make_defect_chain(21, 1.0, {0.21, -0.21}, 10, -0.1), model));

    const auto same = summarize_spectrum(ed_ref, ed_ref, 0.0, 0.0);
    CHECK(same.defect_eigenvalues.empty());
    CHECK(same.gap_def == doctest::Approx(same.gap).epsilon(1e-14));
    CHECK(same.gap > 0.3);

    const auto sum = summarize_spectrum(ed_ref, ed_def, 0.0, 0.01);
    REQUIRE(!sum.defect_eigenvalues.empty());
    CHECK(sum.gap_def < sum.gap);
    // defect gap matches the direct evaluation from the sorted spectra
    double below = sum.i_minus_hi, above = sum.i_plus_lo;
    for (double lam : sum.defect_eigenvalues)
        (lam <= 0.0 ? below = std::max(below, lam) : above = std::min(above, lam));
    CHECK(sum.gap_def == doctest::Approx(above - below).epsilon(1e-14));

    // growing pad absorbs levels monotonically
    std::size_t prev = 1000;
    for (double pad : {0.0, 0.02, 0.05, 0.2}) {
        const auto s = summarize_spectrum(ed_ref, ed_def, 0.0, pad);
        CHECK(s.defect_eigenvalues.size() <= prev);
        prev = s.defect_eigenvalues.size();
    }

    CHECK_THROWS_AS(summarize_spectrum(ed_ref, ed_ref, ed_ref.eigenvalues(3), 0.0), std::runtime_error);
}

TEST_CASE("derivative reduces to the decoupled form on diagonal systems") {
    Configuration c = make_chain(3, 10.0, {0.5, -0.2, 0.1});
    HoppingModel far;  // hops are ~e^{-10}, numerically negligible
    far.h0 = 1e-12;
    far.gamma0 = 5.0;
    const auto ed = eig(assemble(c, far));
    const Observable fd = Observable::fermi_dirac(5.0, 0.0);
    const double d00 = observable_derivative_potential(ed, fd, 0, 0);
    const double d01 = observable_derivative_potential(ed, fd, 0, 1);
    CHECK(d00 == doctest::Approx(fd.derivative(0.5)).epsilon(1e-8));
    CHECK(std::abs(d01) < 1e-12);
}

TEST_CASE("derivatives match central finite differences") {
    const Configuration c = make_chain(12, 1.0, {0.3, -0.3});
    const auto model = tbtest::unit_model();
    const Observable fd = Observable::fermi_dirac(50.0, 0.0);
    const auto ed = eig(assemble(c, model));

    auto gen = tbtest::rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, 11);
    const double step = 1e-5;
    for (int probe = 0; probe < 20; ++probe) {
        const std::size_t l = pick(gen), m = pick(gen);
        const bool wrt_position = probe % 2 == 0;
        double analytic, numeric;
        if (wrt_position) {
            analytic = observable_derivative_position(c, model, ed, fd, l, m, 0);
            Configuration cp = c, cm = c;
            cp.sites[m].position.x() += step;
            cm.sites[m].position.x() -= step;
            numeric = (local_observable(eig(assemble(cp, model)), fd, l) -
                       local_observable(eig(assemble(cm, model)), fd, l)) /
                      (2 * step);
        } else {
            analytic = observable_derivative_potential(ed, fd, l, m);
            Configuration cp = c, cm = c;
            cp.sites[m].onsite_potential += step;
            cm.sites[m].onsite_potential -= step;
            numeric = (local_observable(eig(assemble(cp, model)), fd, l) -
                       local_observable(eig(assemble(cm, model)), fd, l)) /
                      (2 * step);
        }
        const double scale = std::max(std::abs(numeric), 1e-10);
        CHECK(std::abs(analytic - numeric) / scale < 1e-5);
    }
}

TEST_CASE("three-centre position derivatives also match finite differences") {
    Configuration c = make_chain(6, 1.0, {0.1, -0.1});
    HoppingModel model = tbtest::unit_model();
    model.three_centre_t0 = 0.2;
    const Observable fd = Observable::fermi_dirac(20.0, 0.0);
    const auto ed = eig(assemble(c, model));
    const double step = 1e-5;
    for (std::size_t m : {std::size_t{0}, std::size_t{3}}) {
        const double analytic = observable_derivative_position(c, model, ed, fd, 2, m, 0);
        Configuration cp = c, cm = c;
        cp.sites[m].position.x() += step;
        cm.sites[m].position.x() -= step;
        const double numeric = (local_observable(eig(assemble(cp, model)), fd, 2) -
                                local_observable(eig(assemble(cm, model)), fd, 2)) /
                               (2 * step);
        CHECK(analytic == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("derivative locality: log-linear decay along the gapped chain") {
    const Configuration c = tbtest::gapped_chain(40);
    const auto model = tbtest::gapped_model();
    const Observable fd = Observable::fermi_dirac(100.0, 0.0);
    const auto ed = eig(assemble(c, model));
    const std::size_t l = 5;
    std::vector<double> xs, ys;
    for (std::size_t m = l + 1; m < 30; ++m) {
        const double d = std::abs(observable_derivative_potential(ed, fd, l, m));
        if (d < 1e-14) break;
        xs.push_back(c.distance(l, m));
        ys.push_back(std::log(d));
    }
    REQUIRE(xs.size() >= 8);
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i]; syy += ys[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    CHECK(slope < 0.0);
    CHECK(r * r >= 0.95);
}
