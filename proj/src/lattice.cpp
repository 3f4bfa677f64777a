#include "tb/lattice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace tb {

double Configuration::min_separation() const {
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < sites.size(); ++l)
        for (std::size_t k = l + 1; k < sites.size(); ++k)
            sep = std::min(sep, distance(l, k));
    return sep;
}

double Configuration::diameter() const {
    double diam = 0.0;
    for (std::size_t l = 0; l < sites.size(); ++l)
        for (std::size_t k = l + 1; k < sites.size(); ++k)
            diam = std::max(diam, distance(l, k));
    return diam;
}

std::string Configuration::to_json() const {
    nlohmann::json j;
    auto& pos = j["positions"];
    auto& pot = j["potentials"];
    auto& spe = j["species"];
    for (const auto& s : sites) {
        std::vector<double> p(s.position.data(), s.position.data() + dim);
        pos.push_back(p);
        pot.push_back(s.onsite_potential);
        spe.push_back(static_cast<unsigned>(s.species));
    }
    return j.dump();
}

Configuration Configuration::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const auto& pos = j.at("positions");
    const auto& pot = j.at("potentials");
    const auto& spe = j.at("species");
    if (pos.size() != pot.size() || pos.size() != spe.size())
        throw std::invalid_argument("configuration arrays have mismatched lengths");
    if (pos.empty()) throw std::invalid_argument("configuration must contain at least one site");
    Configuration c;
    c.dim = static_cast<int>(pos.front().size());
    if (c.dim < 1 || c.dim > 3) throw std::invalid_argument("position dimension must be 1, 2 or 3");
    for (std::size_t i = 0; i < pos.size(); ++i) {
        SiteState s;
        for (int d = 0; d < c.dim; ++d) s.position[d] = pos[i].at(d).get<double>();
        s.onsite_potential = pot[i].get<double>();
        s.species = spe[i].get<int>();
        if (!s.position.allFinite()) throw std::invalid_argument("non-finite site position");
        if (s.species < 0) throw std::invalid_argument("species label must be non-negative");
        c.sites.push_back(s);
    }
    return c;
}

double HoppingModel::hop(double r) const {
    double h = h0 * std::exp(-gamma0 * r);
    if (modulation) h *= modulation->value(r);
    return h;
}

double HoppingModel::hop_derivative(double r) const {
    double e = h0 * std::exp(-gamma0 * r);
    if (!modulation) return -gamma0 * e;
    return e * (modulation->derivative(r) - gamma0 * modulation->value(r));
}

double HoppingModel::three_centre_term(double r1, double r2) const {
    return three_centre_t0 * std::exp(-gamma0 * (r1 + r2));
}

std::size_t Hamiltonian::row_of(std::size_t site_id) const {
    for (std::size_t i = 0; i < site_ids.size(); ++i)
        if (site_ids[i] == site_id) return i;
    throw std::out_of_range("site not present in this Hamiltonian");
}

namespace {

void check_configuration(const Configuration& config) {
    if (config.sites.empty()) throw std::invalid_argument("empty configuration");
    for (const auto& s : config.sites)
        if (!s.position.allFinite()) throw std::invalid_argument("non-finite site position");
    for (std::size_t l = 0; l < config.size(); ++l)
        for (std::size_t k = l + 1; k < config.size(); ++k)
            if (config.distance(l, k) < 1e-12)
                throw std::invalid_argument("coincident sites (distance < 1e-12)");
}

// Assembles the matrix over an explicit list of member site ids. Two-centre
// hops between members, three-centre sums restricted to members as well.
Eigen::MatrixXd assemble_over(const Configuration& config, const HoppingModel& model,
                              const std::vector<std::size_t>& members) {
    const std::size_t n = members.size();
    Eigen::MatrixXd H(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            const std::size_t l = members[a], k = members[b];
            double entry = 0.0;
            if (a == b) {
                entry = model.onsite_shift + config.sites[l].onsite_potential;
            } else {
                entry = model.hop(config.distance(l, k));
            }
            if (model.three_centre()) {
                for (std::size_t c = 0; c < n; ++c) {
                    const std::size_t m = members[c];
                    if (m == l || m == k) continue;
                    entry += model.three_centre_term(config.distance(l, m), config.distance(k, m));
                }
            }
            H(a, b) = entry;
            H(b, a) = entry;
        }
    }
    return H;
}

std::vector<std::size_t> all_sites(const Configuration& config) {
    std::vector<std::size_t> ids(config.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return ids;
}

}  // namespace

Hamiltonian assemble(const Configuration& config, const HoppingModel& model) {
    check_configuration(config);
    Hamiltonian H;
    H.site_ids = all_sites(config);
    H.matrix = assemble_over(config, model, H.site_ids);
    H.provenance = Provenance::Full;
    return H;
}

Hamiltonian restrict_to_cluster(const Configuration& config, const HoppingModel& model,
                                std::size_t center, const std::vector<std::size_t>& subset) {
    check_configuration(config);
    if (center >= config.size()) throw std::out_of_range("center site out of range");
    std::vector<std::size_t> members{center};
    for (std::size_t k : subset) {
        if (k == center) throw std::invalid_argument("center must not appear in the cluster subset");
        if (k >= config.size()) throw std::out_of_range("cluster site out of range");
        members.push_back(k);
    }
    std::sort(members.begin(), members.end());
    Hamiltonian H;
    H.site_ids = members;
    H.matrix = assemble_over(config, model, members);
    H.provenance = Provenance::Restricted;
    H.center = center;
    return H;
}

Hamiltonian banded(const Configuration& config, const HoppingModel& model, double r_c) {
    check_configuration(config);
    if (r_c <= 0) throw std::invalid_argument("cutoff radius must be positive");
    const std::size_t n = config.size();
    Hamiltonian H;
    H.site_ids = all_sites(config);
    H.matrix = Eigen::MatrixXd::Zero(n, n);
    H.provenance = Provenance::Banded;
    H.cutoff = r_c;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t m = k; m < n; ++m) {
            if (k != m && config.distance(k, m) > r_c) continue;
            double entry = (k == m) ? model.onsite_shift + config.sites[k].onsite_potential
                                    : model.hop(config.distance(k, m));
            if (model.three_centre()) {
                for (std::size_t mp = 0; mp < n; ++mp) {
                    if (mp == k || mp == m) continue;
                    if (config.distance(k, mp) > r_c || config.distance(m, mp) > r_c) continue;
                    entry += model.three_centre_term(config.distance(k, mp), config.distance(m, mp));
                }
            }
            H.matrix(k, m) = entry;
            H.matrix(m, k) = entry;
        }
    }
    return H;
}

Hamiltonian neighborhood_truncate(const Configuration& config, const HoppingModel& model,
                                  std::size_t center, double r_c) {
    if (r_c <= 0) throw std::invalid_argument("cutoff radius must be positive");
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < config.size(); ++k)
        if (k != center && config.distance(center, k) <= r_c) subset.push_back(k);
    Hamiltonian H = restrict_to_cluster(config, model, center, subset);
    H.provenance = Provenance::Neighborhood;
    H.cutoff = r_c;
    return H;
}

Eigen::MatrixXd position_derivative(const Configuration& config, const HoppingModel& model,
                                    std::size_t m, int component) {
    check_configuration(config);
    if (m >= config.size()) throw std::out_of_range("site index out of range");
    if (component < 0 || component >= 3) throw std::out_of_range("component out of range");
    const std::size_t n = config.size();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);

    // d r_{lk} / d (r_m)_c = (delta_{km} - delta_{lm}) (r_k - r_l)_c / r_{lk}
    auto dr = [&](std::size_t l, std::size_t k) -> double {
        if (l == k) return 0.0;
        const double r = config.distance(l, k);
        const double u = (config.sites[k].position[component] - config.sites[l].position[component]) / r;
        double s = 0.0;
        if (k == m) s += 1.0;
        if (l == m) s -= 1.0;
        return s * u;
    };

    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t k = l; k < n; ++k) {
            double entry = 0.0;
            if (l != k) entry += model.hop_derivative(config.distance(l, k)) * dr(l, k);
            if (model.three_centre()) {
                for (std::size_t mp = 0; mp < n; ++mp) {
                    if (mp == l || mp == k) continue;
                    const double r1 = config.distance(l, mp), r2 = config.distance(k, mp);
                    const double t = model.three_centre_term(r1, r2);
                    // t depends on r1 and r2 through exp(-gamma0 (r1+r2))
                    entry += -model.gamma0 * t * (dr(l, mp) + dr(k, mp));
                }
            }
            D(l, k) = entry;
            D(k, l) = entry;
        }
    }
    return D;
}

Eigen::MatrixXd potential_derivative(std::size_t n, std::size_t m) {
    if (m >= n) throw std::out_of_range("site index out of range");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    D(m, m) = 1.0;
    return D;
}

Configuration make_chain(std::size_t n, double spacing, const std::vector<double>& onsite_pattern) {
    if (n < 1) throw std::invalid_argument("chain must have at least one site");
    if (spacing <= 0) throw std::invalid_argument("spacing must be positive");
    Configuration c;
    c.dim = 1;
    for (std::size_t j = 0; j < n; ++j) {
        SiteState s;
        s.position = Vec3(spacing * static_cast<double>(j), 0.0, 0.0);
        s.onsite_potential = onsite_pattern.empty() ? 0.0 : onsite_pattern[j % onsite_pattern.size()];
        c.sites.push_back(s);
    }
    return c;
}

Configuration make_defect_chain(std::size_t n, double spacing, const std::vector<double>& onsite_pattern,
                                std::size_t defect_site, double defect_potential) {
    Configuration c = make_chain(n, spacing, onsite_pattern);
    if (defect_site >= n) throw std::out_of_range("defect site out of range");
    c.sites[defect_site].onsite_potential = defect_potential;
    c.sites[defect_site].species = 1;
    return c;
}

}  // namespace tb
