#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "zk/basis.hpp"
#include "zk/operators.hpp"

namespace test {

inline std::shared_ptr<const zk::SpectralBasis> basis(int n_x, int n_perp, int d = 1,
                                                      zk::TransverseBc bc = zk::TransverseBc::dirichlet)
{
    zk::DomainConfig c;
    c.d = d;
    c.n_x = n_x;
    c.n_perp = n_perp;
    c.transverse_bc = bc;
    return std::make_shared<const zk::SpectralBasis>(zk::build_basis(c));
}

// Gaussian coefficients with a mild decay along the mode index.
inline zk::Vec random_coeffs(const zk::SpectralBasis& b, std::mt19937_64& rng, double decay = 0.25)
{
    std::normal_distribution<double> N;
    zk::Vec v(b.size());
    for (int i = 0; i < b.size(); ++i) v[i] = N(rng) / (1.0 + decay * i);
    return v;
}

inline zk::CoeffField random_field(const zk::SpectralBasis& b, std::mt19937_64& rng, double decay = 0.25)
{
    return zk::CoeffField::of(b, random_coeffs(b, rng, decay));
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace test
