#include "tb/interp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tb {

InterpolationSet InterpolationSet::build(std::vector<double> nodes) {
    if (nodes.empty()) throw std::invalid_argument("empty node set");
    InterpolationSet X;
    X.nodes_ = std::move(nodes);
    const auto [lo, hi] = std::minmax_element(X.nodes_.begin(), X.nodes_.end());
    X.span_ = std::max(*hi - *lo, 1e-300);
    const std::size_t n = X.nodes_.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i)
            if (std::abs(X.nodes_[j] - X.nodes_[i]) < 1e-12 * X.span_)
                throw std::invalid_argument("interpolation nodes too close to distinguish");
    X.log_w_.resize(n);
    X.sign_w_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double lw = 0.0, sg = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            const double d = X.nodes_[j] - X.nodes_[i];
            lw -= std::log(std::abs(d));
            if (d < 0) sg = -sg;
        }
        X.log_w_[j] = lw;
        X.sign_w_[j] = sg;
    }
    const double lmax = *std::max_element(X.log_w_.begin(), X.log_w_.end());
    for (auto& lw : X.log_w_) lw -= lmax;  // weights are scale-invariant in the second form
    return X;
}

std::vector<double> InterpolationSet::values_of(const Observable& obs) const {
    std::vector<double> v(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) v[j] = obs(nodes_[j]);
    return v;
}

Complex InterpolationSet::eval(const std::vector<double>& values, Complex z) const {
    if (values.size() != nodes_.size()) throw std::invalid_argument("value/node count mismatch");
    Complex num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const Complex d = z - nodes_[j];
        if (std::abs(d) < 1e-15 * span_) return values[j];
        const Complex c = sign_w_[j] * std::exp(log_w_[j]) / d;
        num += c * values[j];
        den += c;
    }
    return num / den;
}

double InterpolationSet::eval(const std::vector<double>& values, double x) const {
    return eval(values, Complex(x, 0.0)).real();
}

double InterpolationSet::eval_derivative(const std::vector<double>& values, double x) const {
    if (values.size() != nodes_.size()) throw std::invalid_argument("value/node count mismatch");
    // at (or numerically at) a node, use the differentiation-matrix row
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (std::abs(x - nodes_[i]) < 1e-13 * span_) {
            double acc = 0.0;
            for (std::size_t j = 0; j < nodes_.size(); ++j) {
                if (j == i) continue;
                const double ratio = sign_w_[j] * sign_w_[i] * std::exp(log_w_[j] - log_w_[i]);
                acc += ratio * (values[j] - values[i]) / (nodes_[i] - nodes_[j]);
            }
            return acc;
        }
    }
    double num = 0.0, den = 0.0, dnum = 0.0, dden = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double d = x - nodes_[j];
        const double c = sign_w_[j] * std::exp(log_w_[j]) / d;
        num += c * values[j];
        den += c;
        dnum -= c / d * values[j];
        dden -= c / d;
    }
    return (dnum * den - num * dden) / (den * den);
}

double matrix_interpolant(const EigenDecomposition& ed, const InterpolationSet& X,
                          const Observable& obs, std::size_t l) {
    const std::vector<double> values = X.values_of(obs);
    double acc = 0.0;
    for (Eigen::Index s = 0; s < ed.eigenvalues.size(); ++s) {
        const double w = ed.eigenvectors(static_cast<Eigen::Index>(l), s);
        acc += X.eval(values, ed.eigenvalues(s)) * w * w;
    }
    return acc;
}

double ChebSeries::eval(double x) const {
    return eval(Complex(x, 0)).real();
}

Complex ChebSeries::eval(Complex z) const {
    const Complex u = (2.0 * z - a - b) / (b - a);
    // Clenshaw
    Complex b1 = 0.0, b2 = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) {
        const Complex t = 2.0 * u * b1 - b2 + coeffs[j];
        b2 = b1;
        b1 = t;
    }
    return u * b1 - b2 + coeffs[0];
}

ChebSeries cheb_project(const Observable& obs, int N, double a, double b) {
    if (N < 0) throw std::invalid_argument("negative polynomial degree");
    const int M = 2 * (N + 1);
    std::vector<double> f(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const double theta = M_PI * (k + 0.5) / M;
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
        f[static_cast<std::size_t>(k)] = obs(x);
    }
    ChebSeries s;
    s.a = a;
    s.b = b;
    s.coeffs.resize(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n <= N; ++n) {
        double acc = 0.0;
        for (int k = 0; k < M; ++k) acc += f[static_cast<std::size_t>(k)] * std::cos(n * M_PI * (k + 0.5) / M);
        s.coeffs[static_cast<std::size_t>(n)] = (n == 0 ? 1.0 : 2.0) * acc / M;
    }
    return s;
}

ChebSeries cheb_interp(const Observable& obs, int N, double a, double b) {
    if (N < 1) throw std::invalid_argument("interpolation degree must be at least 1");
    std::vector<double> f(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
        const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(M_PI * j / N);
        f[static_cast<std::size_t>(j)] = obs(x);
    }
    ChebSeries s;
    s.a = a;
    s.b = b;
    s.coeffs.resize(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n <= N; ++n) {
        double acc = 0.5 * (f[0] + (n % 2 == 0 ? 1.0 : -1.0) * f[static_cast<std::size_t>(N)]);
        for (int j = 1; j < N; ++j) acc += f[static_cast<std::size_t>(j)] * std::cos(n * M_PI * j / N);
        double c = 2.0 * acc / N;
        if (n == 0 || n == N) c *= 0.5;
        s.coeffs[static_cast<std::size_t>(n)] = c;
    }
    return s;
}

double DampingKernel::coefficient(int n, int order) const {
    switch (kind) {
        case Kind::None:
            return 1.0;
        case Kind::Fejer:
            return 1.0 - static_cast<double>(n) / order;
        case Kind::Jackson: {
            const double np = order + 1.0;
            return ((np - n) * std::cos(M_PI * n / np) + std::sin(M_PI * n / np) / std::tan(M_PI / np)) / np;
        }
    }
    return 1.0;
}

double kpm_estimate(const Eigen::MatrixXd& H, std::size_t l, const Observable& obs, int order,
                    const DampingKernel& kernel) {
    if (order < 0) throw std::invalid_argument("negative expansion order");
    const Eigen::Index n = H.rows();
    // Gershgorin bounds
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
        double radius = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) radius += std::abs(H(i, j));
        lo = std::min(lo, H(i, i) - radius);
        hi = std::max(hi, H(i, i) + radius);
    }
    constexpr double delta = 0.01;
    const double centre = 0.5 * (lo + hi);
    const double scale = std::max(0.5 * (hi - lo) / (1.0 - delta), 1e-300);

    const ChebSeries series = cheb_project(obs, order, centre - scale, centre + scale);

    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(n), v1(n);
    v0(static_cast<Eigen::Index>(l)) = 1.0;
    v1 = (H * v0 - centre * v0) / scale;
    double acc = kernel.coefficient(0, order) * series.coeffs[0] * 1.0;
    if (order >= 1) acc += kernel.coefficient(1, order) * series.coeffs[1] * v1(static_cast<Eigen::Index>(l));
    Eigen::VectorXd prev = v0, cur = v1;
    for (int m = 2; m <= order; ++m) {
        Eigen::VectorXd next = 2.0 / scale * (H * cur - centre * cur) - prev;
        const double mu = next(static_cast<Eigen::Index>(l));
        if (std::abs(mu) > 1.0 + 1e-6)
            throw std::runtime_error("Chebyshev moment escaped [-1,1]; spectrum not inside the scaled interval");
        acc += kernel.coefficient(m, order) * series.coeffs[static_cast<std::size_t>(m)] * mu;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return acc;
}

namespace {

constexpr std::size_t kMaxClusterSize = 5;
constexpr std::size_t kMaxVacuumSites = 12;
constexpr int kMaxVacuumOrder = 5;

void check_cluster(const Configuration& config, std::size_t l, const std::vector<std::size_t>& K,
                   std::size_t max_size) {
    if (K.size() > max_size) throw std::invalid_argument("cluster too large for the combinatorial sum");
    for (std::size_t k : K) {
        if (k == l) throw std::invalid_argument("centre site must not appear in the cluster");
        if (k >= config.size()) throw std::out_of_range("cluster site out of range");
    }
}

// inclusion-exclusion over sub-clusters; `local` maps a sub-cluster to the
// (approximate or exact) observable of the isolated cluster.
template <typename LocalFn>
double cluster_alternating_sum(const std::vector<std::size_t>& K, const LocalFn& local) {
    const std::size_t n = K.size();
    double acc = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(K[i]);
        const double sign = ((n - sub.size()) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * local(sub);
    }
    return acc;
}

}  // namespace

double body_order_component(const Configuration& config, const HoppingModel& model,
                            const InterpolationSet& X, const Observable& obs,
                            std::size_t l, const std::vector<std::size_t>& K) {
    check_cluster(config, l, K, kMaxClusterSize);
    return cluster_alternating_sum(K, [&](const std::vector<std::size_t>& sub) {
        const Hamiltonian h = restrict_to_cluster(config, model, l, sub);
        return matrix_interpolant(eig(h), X, obs, h.row_of(l));
    });
}

double vacuum_potential(const Configuration& config, const HoppingModel& model,
                        const Observable& obs, std::size_t l, const std::vector<std::size_t>& K) {
    check_cluster(config, l, K, kMaxClusterSize);
    return cluster_alternating_sum(K, [&](const std::vector<std::size_t>& sub) {
        const Hamiltonian h = restrict_to_cluster(config, model, l, sub);
        return local_observable(eig(h), obs, h.row_of(l));
    });
}

double vacuum_sum(const Configuration& config, const HoppingModel& model, const Observable& obs,
                  std::size_t l, int body_order) {
    if (config.size() > kMaxVacuumSites) throw std::invalid_argument("system too large for the vacuum expansion");
    if (body_order < 1 || body_order > kMaxVacuumOrder)
        throw std::invalid_argument("vacuum expansion body order out of range");
    std::vector<std::size_t> others;
    for (std::size_t k = 0; k < config.size(); ++k)
        if (k != l) others.push_back(k);
    const std::size_t n = others.size();
    const std::size_t max_neighbours = static_cast<std::size_t>(body_order) - 1;

    // memoised exact observables of all isolated clusters up to the body order
    std::vector<double> value(std::size_t{1} << n, 0.0);
    std::vector<bool> have(std::size_t{1} << n, false);
    auto cluster_value = [&](std::size_t mask) {
        if (have[mask]) return value[mask];
        std::vector<std::size_t> sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(others[i]);
        const Hamiltonian h = restrict_to_cluster(config, model, l, sub);
        value[mask] = local_observable(eig(h), obs, h.row_of(l));
        have[mask] = true;
        return value[mask];
    };

    double acc = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (size > max_neighbours) continue;
        // V^{(|S|)}(S) = sum over K subset S of (-1)^{|S|-|K|} O(H|_{l;K})
        double v = 0.0;
        std::size_t sub = mask;
        while (true) {
            const auto ssz = static_cast<std::size_t>(__builtin_popcountll(sub));
            const double sign = ((size - ssz) % 2 == 0) ? 1.0 : -1.0;
            v += sign * cluster_value(sub);
            if (sub == 0) break;
            sub = (sub - 1) & mask;
        }
        acc += v;
    }
    return acc;
}

double vacuum_moment(const Configuration& config, const HoppingModel& model, std::size_t l,
                     int j, int body_order) {
    if (config.size() > kMaxVacuumSites) throw std::invalid_argument("system too large for the vacuum expansion");
    if (body_order < 1 || body_order > kMaxVacuumOrder)
        throw std::invalid_argument("vacuum expansion body order out of range");
    if (j < 0) throw std::invalid_argument("negative moment order");
    if (j == 0) return 1.0;
    const Eigen::MatrixXd H = assemble(config, model).matrix;
    const std::size_t n = config.size();

    // depth-first walk over index tuples (l, l_1, ..., l_{j-1}, l) with the
    // number of distinct visited sites capped at the body order
    double total = 0.0;
    struct Frame {
        std::size_t site;
        std::size_t visited_mask;
        int visited_count;
        int depth;
        double weight;
    };
    std::vector<Frame> stack;
    stack.push_back({l, std::size_t{1} << l, 1, 0, 1.0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.depth == j - 1) {
            total += f.weight * H(static_cast<Eigen::Index>(f.site), static_cast<Eigen::Index>(l));
            continue;
        }
        for (std::size_t next = 0; next < n; ++next) {
            const std::size_t bit = std::size_t{1} << next;
            const bool fresh = !(f.visited_mask & bit);
            const int count = f.visited_count + (fresh ? 1 : 0);
            if (count > body_order) continue;
            stack.push_back({next, f.visited_mask | bit, count, f.depth + 1,
                             f.weight * H(static_cast<Eigen::Index>(f.site), static_cast<Eigen::Index>(next))});
        }
    }
    return total;
}

void write_nodes_csv(std::ostream& out, const std::vector<double>& nodes) {
    char buf[40];
    for (double x : nodes) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << buf << "\n";
    }
}

std::vector<double> read_nodes_csv(std::istream& in) {
    std::vector<double> nodes;
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        nodes.push_back(std::stod(line));
    }
    if (nodes.empty()) throw std::invalid_argument("node CSV contains no values");
    return nodes;
}

}  // namespace tb
