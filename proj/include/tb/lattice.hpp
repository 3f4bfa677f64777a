#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tb {

using Vec3 = Eigen::Vector3d;

// State of a single atom: position (reduced length units, zero-padded to 3d),
// on-site potential and a species label.
struct SiteState {
    Vec3 position = Vec3::Zero();
    double onsite_potential = 0.0;
    int species = 0;
};

struct Configuration {
    std::vector<SiteState> sites;
    int dim = 1;

    std::size_t size() const { return sites.size(); }
    double distance(std::size_t l, std::size_t k) const {
        return (sites[k].position - sites[l].position).norm();
    }
    // Smallest pairwise distance; +inf for a single site.
    double min_separation() const;
    double diameter() const;

    std::string to_json() const;
    static Configuration from_json(const std::string& text);
};

// Optional radial modulation of the hopping, bounded by 1 in magnitude so
// the exponential envelope stays intact. value/derivative as a pair.
struct RadialModulation {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

// Exponential two-/three-centre hopping model:
//   h(r)     = h0 * exp(-gamma0 r) * mod(r)      for r > 0
//   t(r1,r2) = t0 * exp(-gamma0 (r1 + r2))
// The diagonal two-centre contribution at zero separation is onsite_shift.
struct HoppingModel {
    double h0 = 1.0;
    double gamma0 = 1.0;
    double onsite_shift = 0.0;
    double three_centre_t0 = 0.0;
    std::optional<RadialModulation> modulation;

    bool three_centre() const { return three_centre_t0 != 0.0; }
    double hop(double r) const;
    double hop_derivative(double r) const;
    double three_centre_term(double r1, double r2) const;
};

enum class Provenance { Full, Restricted, Banded, Neighborhood };

struct Hamiltonian {
    Eigen::MatrixXd matrix;
    // site_ids[row] = index of the site (in the parent Configuration) that
    // this row/column of the matrix corresponds to.
    std::vector<std::size_t> site_ids;
    Provenance provenance = Provenance::Full;
    double cutoff = 0.0;        // r_c for Banded/Neighborhood
    std::size_t center = 0;     // central site for Restricted/Neighborhood

    std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
    // Row of the given site id; throws if the site is not part of this matrix.
    std::size_t row_of(std::size_t site_id) const;
};

Hamiltonian assemble(const Configuration& config, const HoppingModel& model);

// Hamiltonian of the isolated cluster {center} U subset; the three-centre
// summation runs over cluster members only.
Hamiltonian restrict_to_cluster(const Configuration& config, const HoppingModel& model,
                                std::size_t center, const std::vector<std::size_t>& subset);

Hamiltonian banded(const Configuration& config, const HoppingModel& model, double r_c);

Hamiltonian neighborhood_truncate(const Configuration& config, const HoppingModel& model,
                                  std::size_t center, double r_c);

// d/d(component c of r_m) and d/dv_m of the assembled matrix.
Eigen::MatrixXd position_derivative(const Configuration& config, const HoppingModel& model,
                                    std::size_t m, int component);
Eigen::MatrixXd potential_derivative(std::size_t n, std::size_t m);

Configuration make_chain(std::size_t n, double spacing, const std::vector<double>& onsite_pattern);
Configuration make_defect_chain(std::size_t n, double spacing, const std::vector<double>& onsite_pattern,
                                std::size_t defect_site, double defect_potential);

}  // namespace tb
