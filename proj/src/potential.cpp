#include "tb/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tb {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(static_cast<std::size_t>(n));
    w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / pp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = t;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * pp * pp);
    }
}

struct GLRule {
    std::vector<double> x, w;
    explicit GLRule(int n) { gauss_legendre(n, x, w); }
};

const GLRule& rule64() {
    static const GLRule r(64);
    return r;
}

// integral of f over [a,b] after the cosine substitution
// t = (a+b)/2 - (b-a)/2 cos(theta); regularises 1/sqrt endpoints.
template <typename F>
auto integrate_cos(const F& f, double a, double b) -> decltype(f(0.0)) {
    const auto& r = rule64();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    decltype(f(0.0)) acc{};
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        const double theta = 0.5 * M_PI * (r.x[i] + 1.0);
        const double t = mid - half * std::cos(theta);
        acc += r.w[i] * f(t) * half * std::sin(theta);
    }
    return acc * (0.5 * M_PI);
}

// plain composite Gauss-Legendre over [a,b]
template <typename F>
auto integrate_gl(const F& f, double a, double b) -> decltype(f(0.0)) {
    const auto& r = rule64();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    decltype(f(0.0)) acc{};
    for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(mid + half * r.x[i]);
    return acc * half;
}

}  // namespace

IntervalSet::IntervalSet(std::vector<double> ends) : endpoints(std::move(ends)) {
    if (endpoints.size() < 2 || endpoints.size() % 2 != 0)
        throw std::invalid_argument("interval set needs an even number (>= 2) of endpoints");
    for (std::size_t i = 1; i < endpoints.size(); ++i)
        if (!(endpoints[i] > endpoints[i - 1]))
            throw std::invalid_argument("interval endpoints must be strictly ascending");
}

IntervalSet IntervalSet::parse(const std::string& text) {
    std::vector<double> ends;
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] == 'U' || s[pos] == 'u') {
            ++pos;
            continue;
        }
        if (s[pos] != '[') throw std::invalid_argument("expected '[' in interval set: " + text);
        const std::size_t close = s.find(']', pos);
        if (close == std::string::npos) throw std::invalid_argument("unterminated interval in: " + text);
        const std::string body = s.substr(pos + 1, close - pos - 1);
        const std::size_t comma = body.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("interval needs two endpoints: " + text);
        ends.push_back(std::stod(body.substr(0, comma)));
        ends.push_back(std::stod(body.substr(comma + 1)));
        pos = close + 1;
    }
    return IntervalSet(ends);
}

std::string IntervalSet::str() const {
    std::ostringstream os;
    for (int i = 0; i < bands(); ++i) {
        if (i) os << "U";
        os << "[" << band_lo(i) << "," << band_hi(i) << "]";
    }
    return os.str();
}

bool IntervalSet::contains(double x, double tol) const {
    for (int i = 0; i < bands(); ++i)
        if (x >= band_lo(i) - tol && x <= band_hi(i) + tol) return true;
    return false;
}

double GreenParams::numerator(double x) const {
    const int deg = set.bands() - 1;
    if (deg == 0) return 1.0;
    double acc = 1.0;  // monic: x^deg + sum c_j x^j
    for (int j = deg - 1; j >= 0; --j) acc = acc * x + numerator_coeffs[static_cast<std::size_t>(j)];
    return acc;
}

Complex GreenParams::numerator(Complex z) const {
    const int deg = set.bands() - 1;
    if (deg == 0) return 1.0;
    Complex acc = 1.0;
    for (int j = deg - 1; j >= 0; --j) acc = acc * z + numerator_coeffs[static_cast<std::size_t>(j)];
    return acc;
}

namespace {

// |prod_k (x - e_k)| with the two panel endpoints removed; those factors are
// cancelled analytically by the cosine substitution.
double abs_prod_excluding(const std::vector<double>& ends, double x, double skip_a, double skip_b) {
    double acc = 1.0;
    for (double e : ends) {
        if (e == skip_a || e == skip_b) continue;
        acc *= std::abs(x - e);
    }
    return acc;
}

// One gap-condition integral: int over (a,b) of x^p / sqrt(prod |x - e_k|).
double gap_power_integral(const IntervalSet& E, double a, double b, int p) {
    const auto& r = rule64();
    double acc = 0.0;
    const int panels = 8;
    // theta-space panels; substitution absorbs the endpoint singularities
    for (int q = 0; q < panels; ++q) {
        const double t0 = M_PI * q / panels, t1 = M_PI * (q + 1) / panels;
        const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const double theta = mid + half * r.x[i];
            const double x = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(theta);
            const double rest = abs_prod_excluding(E.endpoints, x, a, b);
            acc += r.w[i] * half * std::pow(x, p) / std::sqrt(rest);
        }
    }
    return acc;
}

}  // namespace

GreenParams solve_gap_params(const IntervalSet& E) {
    GreenParams params{E, {}};
    const int m = E.bands();
    if (m == 1) return params;
    const int g = m - 1;
    Eigen::MatrixXd A(g, g);
    Eigen::VectorXd rhs(g);
    for (int i = 0; i < g; ++i) {
        const double a = E.endpoints[2 * static_cast<std::size_t>(i) + 1];
        const double b = E.endpoints[2 * static_cast<std::size_t>(i) + 2];
        for (int j = 0; j < g; ++j) A(i, j) = gap_power_integral(E, a, b, j);
        rhs(i) = -gap_power_integral(E, a, b, m - 1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(g - 1);
    if (!(cond < 1e12)) throw std::runtime_error("gap-condition system is numerically singular");
    Eigen::VectorXd c = svd.solve(rhs);
    params.numerator_coeffs.assign(c.data(), c.data() + g);
    return params;
}

double GreenParams::gap_residual(int gap) const {
    const double a = set.endpoints[2 * static_cast<std::size_t>(gap) + 1];
    const double b = set.endpoints[2 * static_cast<std::size_t>(gap) + 2];
    double acc = gap_power_integral(set, a, b, set.bands() - 1);
    for (int j = 0; j + 1 < set.bands(); ++j)
        acc += numerator_coeffs[static_cast<std::size_t>(j)] * gap_power_integral(set, a, b, j);
    return acc;
}

namespace {

// one real segment [a,b] of sign * P(t)/sqrt(prod |t - e_k|); endpoints that
// coincide with set endpoints carry 1/sqrt singularities cancelled by the
// cosine substitution.
double real_segment_integral(const GreenParams& params, double a, double b, double sign) {
    const auto& ends = params.set.endpoints;
    const bool sing_a = std::find(ends.begin(), ends.end(), a) != ends.end();
    const bool sing_b = std::find(ends.begin(), ends.end(), b) != ends.end();
    const auto& r = rule64();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        const double theta = 0.5 * M_PI * (r.x[i] + 1.0);
        const double t = mid - half * std::cos(theta);
        double denom = 1.0;
        for (double e : ends) {
            if ((sing_a && e == a) || (sing_b && e == b)) continue;
            denom *= std::abs(t - e);
        }
        double jac = half * std::sin(theta);
        if (sing_a) jac /= std::sqrt(std::max(t - a, 0.0));
        if (sing_b) jac /= std::sqrt(std::max(b - t, 0.0));
        acc += r.w[i] * sign * params.numerator(t) / std::sqrt(denom) * jac;
    }
    return 0.5 * M_PI * acc;
}

// real-axis piecewise evaluation: Re of the integrand just above the axis.
// q = number of endpoints above the segment; the phase i^q makes the band
// segments purely imaginary and the gap/outer segments real.
double green_real_axis(const GreenParams& params, double x) {
    const auto& ends = params.set.endpoints;
    const double top = params.set.hi();
    if (x == top) return 0.0;

    const double xlo = std::min(x, top), xhi = std::max(x, top);
    const double span = params.set.hi() - params.set.lo();
    std::vector<double> cuts{xlo};
    for (double e : ends)
        if (e > xlo && e < xhi) cuts.push_back(e);
    // far outer reach: geometric panels resolve the 1/t decay
    if (xhi > params.set.hi() + 2.0 * span)
        for (double step = span; params.set.hi() + step < xhi; step *= 4.0)
            cuts.push_back(params.set.hi() + step);
    if (xlo < params.set.lo() - 2.0 * span)
        for (double step = span; params.set.lo() - step > xlo; step *= 4.0)
            cuts.push_back(params.set.lo() - step);
    cuts.push_back(xhi);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;  // ascending-direction integral of Re(integrand)
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        const double midpt = 0.5 * (a + b);
        int q = 0;
        for (double e : ends)
            if (e > midpt) ++q;
        if (q % 2 == 1) continue;  // band segment: purely imaginary integrand
        const double sign = (q % 4 == 0) ? 1.0 : -1.0;
        total += real_segment_integral(params, a, b, sign);
    }
    // g(x) = Re int_{top}^{x}; flip when the walk ran from x up to top
    return (x > top) ? total : -total;
}

Complex sqrt_prod_upper(const std::vector<double>& ends, Complex z) {
    Complex acc = 1.0;
    for (double e : ends) acc *= std::sqrt(z - e);
    return acc;
}

// integral of the complex integrand along the straight segment [z0, z1],
// cosine-substituted panels with optional extra breakpoints (in [0,1]).
Complex integrate_segment(const GreenParams& params, Complex z0, Complex z1,
                          std::vector<double> breaks) {
    const double span = params.set.hi() - params.set.lo();
    const double seg_len = std::abs(z1 - z0);
    if (seg_len > 4.0 * span) {
        // long reach: geometric refinement from both segment ends
        for (double step = span; step < seg_len; step *= 4.0) {
            breaks.push_back(step / seg_len);
            breaks.push_back(1.0 - step / seg_len);
        }
    }
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [](double u) { return u <= 0.0 || u >= 1.0; }),
                 breaks.end());
    breaks.push_back(0.0);
    breaks.push_back(1.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                 breaks.end());
    const auto& r = rule64();
    const Complex d = z1 - z0;
    Complex acc = 0.0;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double a = breaks[s], b = breaks[s + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        Complex panel = 0.0;
        for (std::size_t i = 0; i < r.x.size(); ++i) {
            const double theta = 0.5 * M_PI * (r.x[i] + 1.0);
            const double u = mid - half * std::cos(theta);
            const Complex z = z0 + u * d;
            panel += r.w[i] * (half * std::sin(theta)) *
                     params.numerator(z) / sqrt_prod_upper(params.set.endpoints, z);
        }
        acc += 0.5 * M_PI * panel;
    }
    return acc * d;
}

}  // namespace

double green_value(const GreenParams& params, Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("green_value requires finite z");
    double y = std::abs(z.imag());
    if (y <= 1e-12) return green_real_axis(params, z.real());

    const double top = params.set.hi();
    const Complex z0(top, 0.0), z1(top, y), z2(z.real(), y);

    // vertical leg from the branch point at max E
    Complex total = integrate_segment(params, z0, z1, {});

    // horizontal leg: refine near every endpoint projection
    std::vector<double> breaks;
    const double xa = std::min(top, z.real()), xb = std::max(top, z.real());
    const double span = xb - xa;
    if (span > 0) {
        for (double e : params.set.endpoints) {
            if (e < xa || e > xb) continue;
            const double u = (e - std::min(top, z.real())) / span;
            for (double scale : {1.0, 4.0, 16.0, 64.0, 256.0}) {
                const double du = scale * y / span;
                if (du < 1.0) {
                    if (u - du > 0) breaks.push_back(u - du);
                    if (u + du < 1) breaks.push_back(u + du);
                }
            }
            breaks.push_back(std::clamp(u, 0.0, 1.0));
        }
        // map to the actual orientation of the segment
        if (z.real() < top)
            for (auto& u : breaks) u = 1.0 - u;
        total += integrate_segment(params, z1, z2, breaks);
    }
    return total.real();
}

EquilibriumCDF equilibrium_cdf(const GreenParams& params) {
    EquilibriumCDF cdf;
    const auto& ends = params.set.endpoints;
    constexpr int kGrid = 4096;
    for (int bandi = 0; bandi < params.set.bands(); ++bandi) {
        EquilibriumCDF::BandTable tab;
        tab.a = params.set.band_lo(bandi);
        tab.b = params.set.band_hi(bandi);
        const double mid = 0.5 * (tab.a + tab.b), half = 0.5 * (tab.b - tab.a);
        // theta-space density: |P(x)| / (pi sqrt(prod_{other} |x - e_k|))
        auto f = [&](double theta) {
            const double x = mid - half * std::cos(theta);
            return std::abs(params.numerator(x)) /
                   (M_PI * std::sqrt(abs_prod_excluding(ends, x, tab.a, tab.b)));
        };
        // high-order mass for the band
        double mass = 0.0;
        for (int q = 0; q < 4; ++q)
            mass += integrate_gl(f, M_PI * q / 4.0, M_PI * (q + 1) / 4.0);
        tab.mass = mass;

        // cumulative table by composite Simpson on the uniform theta grid
        tab.cum.resize(kGrid + 1);
        tab.cum[0] = 0.0;
        const double h = M_PI / kGrid;
        double prev = f(0.0);
        double mid_prev = f(0.5 * h);
        for (int i = 1; i <= kGrid; ++i) {
            const double cur = f(i * h);
            tab.cum[static_cast<std::size_t>(i)] =
                tab.cum[static_cast<std::size_t>(i - 1)] + (h / 6.0) * (prev + 4.0 * mid_prev + cur);
            prev = cur;
            if (i < kGrid) mid_prev = f((i + 0.5) * h);
        }
        // pin the endpoint to the high-order mass
        const double scale = tab.mass / tab.cum.back();
        for (auto& c : tab.cum) c *= scale;
        cdf.bands.push_back(std::move(tab));
    }
    return cdf;
}

double EquilibriumCDF::total_mass() const {
    double m = 0.0;
    for (const auto& b : bands) m += b.mass;
    return m;
}

double EquilibriumCDF::cdf(double x) const {
    double acc = 0.0;
    for (const auto& band : bands) {
        if (x >= band.b) {
            acc += band.mass;
            continue;
        }
        if (x <= band.a) break;
        const double mid = 0.5 * (band.a + band.b), half = 0.5 * (band.b - band.a);
        const double c = std::clamp((mid - x) / half, -1.0, 1.0);
        const double theta = std::acos(c);
        const double pos = theta / M_PI * (static_cast<double>(band.cum.size()) - 1.0);
        const auto i = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(band.cum.size()) - 2.0));
        const double frac = pos - static_cast<double>(i);
        acc += band.cum[i] * (1.0 - frac) + band.cum[i + 1] * frac;
        break;
    }
    return acc;
}

double EquilibriumCDF::quantile(double level) const {
    const double total = total_mass();
    level = std::clamp(level, 0.0, total);
    double below = 0.0;
    for (const auto& band : bands) {
        if (level > below + band.mass) {
            below += band.mass;
            continue;
        }
        const double target = level - below;
        // bisection on the cumulative table (monotone)
        const auto& cum = band.cum;
        std::size_t lo = 0, hi = cum.size() - 1;
        while (hi - lo > 1) {
            const std::size_t midi = (lo + hi) / 2;
            if (cum[midi] < target) lo = midi;
            else hi = midi;
        }
        const double seg = cum[hi] - cum[lo];
        const double frac = (seg > 0) ? (target - cum[lo]) / seg : 0.0;
        const double theta = (static_cast<double>(lo) + frac) * M_PI / (static_cast<double>(cum.size()) - 1.0);
        const double mid = 0.5 * (band.a + band.b), half = 0.5 * (band.b - band.a);
        return mid - half * std::cos(theta);
    }
    return bands.back().b;
}

std::vector<double> fejer_points(const GreenParams& params, int n) {
    return fejer_points(params, equilibrium_cdf(params), n);
}

std::vector<double> fejer_points(const GreenParams& params, const EquilibriumCDF& cdf, int n) {
    if (n < 2) throw std::invalid_argument("fejer_points needs n >= 2");
    std::vector<double> pts(static_cast<std::size_t>(n));
    const double total = cdf.total_mass();
    for (int j = 0; j < n; ++j)
        pts[static_cast<std::size_t>(j)] = cdf.quantile(total * j / (n - 1));
    pts.front() = params.set.lo();
    pts.back() = params.set.hi();
    return pts;
}

std::vector<double> leja_points(const GreenParams& params, int n, int grid_resolution) {
    if (n < 1) throw std::invalid_argument("leja_points needs n >= 1");
    if (grid_resolution < 2) throw std::invalid_argument("grid resolution too small");
    std::vector<double> grid;
    for (int bi = 0; bi < params.set.bands(); ++bi) {
        const double mid = 0.5 * (params.set.band_lo(bi) + params.set.band_hi(bi));
        const double half = 0.5 * (params.set.band_hi(bi) - params.set.band_lo(bi));
        for (int k = 0; k < grid_resolution; ++k)
            grid.push_back(mid - half * std::cos(M_PI * k / (grid_resolution - 1)));
    }
    std::vector<double> logprod(grid.size(), 0.0);
    std::vector<bool> used(grid.size(), false);

    std::vector<double> pts{params.set.hi()};
    // the seed coincides with the last grid point of the last band
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == params.set.hi()) used[i] = true;

    while (static_cast<int>(pts.size()) < n) {
        const double znew = pts.back();
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (used[i]) continue;
            logprod[i] += std::log(std::abs(grid[i] - znew));
            if (logprod[i] > best) {
                best = logprod[i];
                best_i = i;
            }
        }
        used[best_i] = true;
        pts.push_back(grid[best_i]);
    }
    return pts;
}

double asymptotic_rate(const GreenParams& params, const Observable& obs) {
    const Complex anchor = obs.singularity_anchor();
    if (std::abs(anchor.imag()) <= 1e-12 && params.set.contains(anchor.real(), 1e-12))
        throw std::domain_error("observable singularity lies inside the approximation set");
    return green_value(params, anchor);
}

namespace {

double equilibrium_potential(const GreenParams& params, const EquilibriumCDF& cdf, double x0) {
    const auto& ends = params.set.endpoints;
    double integral = 0.0;  // int log|x0 - t| dw(t)
    for (const auto& band : cdf.bands) {
        const double mid = 0.5 * (band.a + band.b), half = 0.5 * (band.b - band.a);
        auto dens = [&](double theta) {
            const double x = mid - half * std::cos(theta);
            return std::abs(params.numerator(x)) /
                   (M_PI * std::sqrt(abs_prod_excluding(ends, x, band.a, band.b)));
        };
        if (x0 >= band.a && x0 <= band.b) {
            // log-singular band: subtract the classical integral
            // int_0^pi log|cos t - cos t0| dt = -pi log 2
            const double theta0 = std::acos(std::clamp((mid - x0) / half, -1.0, 1.0));
            const double f0 = dens(theta0);
            auto reg = [&](double theta) {
                const double g = std::log(std::abs(std::cos(theta) - std::cos(theta0)));
                const double df = dens(theta) - f0;
                return std::isfinite(g) ? g * df : 0.0;
            };
            double smooth = 0.0;
            for (const auto& seg : {std::pair{0.0, theta0}, std::pair{theta0, M_PI}}) {
                if (seg.second - seg.first < 1e-14) continue;
                smooth += integrate_cos(reg, seg.first, seg.second);
            }
            integral += smooth + f0 * (-M_PI * std::log(2.0)) + std::log(half) * band.mass;
        } else {
            auto plain = [&](double theta) {
                const double x = mid - half * std::cos(theta);
                return std::log(std::abs(x0 - x)) * dens(theta);
            };
            integral += integrate_gl(plain, 0.0, M_PI);
        }
    }
    return -integral;  // U(x0) = -int log|x0 - t| dw
}

}  // namespace

double capacity(const GreenParams& params) {
    const EquilibriumCDF cdf = equilibrium_cdf(params);
    const double x0 = 0.5 * (params.set.band_lo(0) + params.set.band_hi(0));
    const double x1 = 0.5 * (params.set.band_lo(params.set.bands() - 1) +
                             params.set.band_hi(params.set.bands() - 1));
    const double u0 = equilibrium_potential(params, cdf, x0);
    const double u1 = equilibrium_potential(params, cdf, x1);
    if (std::abs(u0 - u1) > 1e-6)
        throw std::runtime_error("equilibrium potential probes disagree; quadrature failure");
    return std::exp(-0.5 * (u0 + u1));
}

}  // namespace tb
