#pragma once

#include <random>
#include <vector>

#include "tb/lattice.hpp"
#include "tb/spectral.hpp"

namespace tbtest {

// Dimerised chain whose spectrum sits inside [-1,-0.2] U [0.2,1]; the
// parameters were fixed once against eig and are asserted in the tests.
inline tb::Configuration gapped_chain(std::size_t n) {
    return tb::make_chain(n, 1.0, {0.21, -0.21});
}

inline tb::HoppingModel gapped_model() {
    tb::HoppingModel m;
    m.h0 = 0.42 * std::exp(3.0);
    m.gamma0 = 3.0;
    return m;
}

// simple two-centre model with unit-range hopping, h(r) = e^{-r}
inline tb::HoppingModel unit_model() {
    tb::HoppingModel m;
    m.h0 = 1.0;
    m.gamma0 = 1.0;
    return m;
}

inline std::mt19937_64 rng(std::uint64_t seed = 20240917ULL) { return std::mt19937_64(seed); }

// Bond-alternation chain: the gap comes from the geometry, so it survives a
// self-consistent onsite potential.
inline tb::Configuration dimerized_chain(std::size_t n, double d1 = 0.9, double d2 = 1.3) {
    tb::Configuration c;
    c.dim = 1;
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tb::SiteState s;
        s.position = tb::Vec3(x, 0.0, 0.0);
        c.sites.push_back(s);
        x += (i % 2 == 0) ? d1 : d2;
    }
    return c;
}

inline tb::HoppingModel dimerized_model() {
    tb::HoppingModel m;
    m.h0 = 2.5;
    m.gamma0 = 2.0;
    return m;
}

}  // namespace tbtest
