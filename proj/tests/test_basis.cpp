#include <doctest.h>

#include <cmath>

#include "oracles/fd_beam.hpp"
#include "support.hpp"
#include "zk/errors.hpp"

using namespace zk;

namespace {

// Gram matrix of all modes on a grid finer than the basis's own.
Mat gram(const SpectralBasis& b, int qx, int qp)
{
    const GridTables g = make_grid(b, qx, qp);
    const int P = g.perp_points();
    Mat V(g.quad_x * P, b.size());
    for (int i = 0; i < b.size(); ++i) {
        const Mat vals = synthesize(b, g, CoeffField::of(b, Vec::Unit(b.size(), i)));
        V.col(i) = Eigen::Map<const Vec>(vals.data(), vals.size());
    }
    Vec w(g.quad_x * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < g.quad_x; ++q) w[p * g.quad_x + q] = g.x_weights[q] * g.w_perp[p];
    return V.transpose() * w.asDiagonal() * V;
}

// bisection on tan(b) = tanh(b) written as sin(b) cosh(b) - cos(b) sinh(b)
double bisect_root(int a)
{
    auto f = [](double b) { return std::sin(b) - std::tanh(b) * std::cos(b); };
    double lo = a * M_PI + 1e-9, hi = a * M_PI + M_PI / 2 - 1e-9;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 exactly")
{
    for (int n : {1, 2, 5, 17, 80}) {
        const GaussRule r = gauss_legendre(n, 0.0, 1.0);
        CHECK(r.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        for (int k = 0; k <= 2 * n - 1; k += std::max(1, (2 * n - 1) / 7)) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
        for (int i = 1; i < n; ++i) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
}

TEST_CASE("x wavenumbers solve tan b = tanh b and match a bisection oracle")
{
    const auto b = test::basis(12, 1);
    CHECK(b->x_wavenumbers[0] == doctest::Approx(3.92660231204792).epsilon(1e-12));
    for (int a = 0; a < 12; ++a) {
        const double beta = b->x_wavenumbers[a];
        CHECK(std::abs(beta - bisect_root(a + 1)) < 1e-11 * beta);
        CHECK(b->x_eigenvalues[a] == doctest::Approx(std::pow(beta, 4)).epsilon(1e-15));
    }
    CHECK(b->root_tolerance < 1e-12);
}

TEST_CASE("lowest x eigenvalue agrees with the finite-difference oracle")
{
    const auto b = test::basis(4, 1);
    const auto c2 = oracle::fd_beam(2000), c4 = oracle::fd_beam(4000), c8 = oracle::fd_beam(8000);
    const double fine = oracle::richardson(c4.lambda, c8.lambda);
    const double coarse = oracle::richardson(c2.lambda, c4.lambda);
    CHECK(test::rel(fine, coarse) < 1e-7);  // extrapolation has settled
    CHECK(test::rel(b->x_eigenvalues[0], fine) < 1e-6);
    // trace of the normalised mode at the pinned end
    const double slope = oracle::richardson(c4.slope0, c8.slope0);
    CHECK(test::rel(std::abs(b->x_dx_at_0[0]), slope) < 1e-5);
}

TEST_CASE("gram matrix is the identity")
{
    SUBCASE("d = 1, dirichlet")
    {
        const auto b = test::basis(16, 16);
        CHECK((gram(*b, 100, 100) - Mat::Identity(b->size(), b->size())).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("d = 1, periodic")
    {
        const auto b = test::basis(10, 9, 1, TransverseBc::periodic);
        CHECK((gram(*b, 80, 40) - Mat::Identity(b->size(), b->size())).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("d = 2")
    {
        const auto b = test::basis(5, 4, 2);
        CHECK((gram(*b, 40, 24) - Mat::Identity(b->size(), b->size())).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("every mode satisfies the boundary conditions")
{
    const auto b = test::basis(16, 16);
    for (int a = 0; a < 16; ++a) {
        const double s2 = std::pow(b->x_wavenumbers[a], 2);
        CHECK(std::abs(x_mode(*b, a, 0.0, 0)) < 1e-8);
        CHECK(std::abs(x_mode(*b, a, 1.0, 0)) < 1e-8);
        CHECK(std::abs(x_mode(*b, a, 1.0, 1)) < 1e-8 * b->x_wavenumbers[a]);
        CHECK(std::abs(x_mode(*b, a, 0.0, 2)) < 1e-8 * s2);
        CHECK(std::abs(b->x_dx_at_1[a]) < 1e-8 * b->x_wavenumbers[a]);
        CHECK(std::abs(b->x_dxx_at_0[a]) < 1e-8 * s2);
    }
    for (int j = 0; j < 16; ++j)
        for (double y : {-M_PI / 2, M_PI / 2}) {
            const double q2 = std::pow(perp_wavenumber(TransverseBc::dirichlet, j), 2);
            CHECK(std::abs(perp_mode(TransverseBc::dirichlet, j, y, 0)) < 1e-8);
            CHECK(std::abs(perp_mode(TransverseBc::dirichlet, j, y, 2)) < 1e-8 * q2);
        }
}

TEST_CASE("periodic transverse modes are periodic with their derivatives")
{
    for (int j = 0; j < 9; ++j)
        for (int k = 0; k <= 3; ++k) {
            const double q = std::max(1, perp_wavenumber(TransverseBc::periodic, j));
            const double gap = perp_mode(TransverseBc::periodic, j, -M_PI / 2, k) - perp_mode(TransverseBc::periodic, j, M_PI / 2, k);
            CHECK(std::abs(gap) < 1e-13 * std::pow(q, k + 1));
        }
}

TEST_CASE("tensor eigenvalues are sorted and add up")
{
    const auto b = test::basis(6, 5, 2);
    for (int i = 0; i < b->size(); ++i) {
        const double expect = b->x_eigenvalues[b->mode_x[i]] + b->perp_q4[b->mode_perp[i]];
        CHECK(b->L_eigenvalues[i] == doctest::Approx(expect).epsilon(1e-15));
        if (i > 0) CHECK(b->L_eigenvalues[i] >= b->L_eigenvalues[i - 1]);
        CHECK(b->index_of(b->mode_x[i], b->mode_perp[i]) == i);
    }
    CHECK(b->size() == 6 * 25);
}

TEST_CASE("analysis inverts synthesis")
{
    std::mt19937_64 rng(11);
    for (int d : {1, 2}) {
        const auto b = test::basis(7, 5, d);
        const CoeffField u = test::random_field(*b, rng);
        const CoeffField back = analyze(*b, synthesize(*b, u));
        CHECK((back.coeffs - u.coeffs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("traces")
{
    std::mt19937_64 rng(5);
    const auto b = test::basis(10, 8);
    const CoeffField u = test::random_field(*b, rng);
    CHECK(eval_trace(*b, u, Trace::ux_at_1).norm < 1e-8);
    CHECK(eval_trace(*b, u, Trace::uxx_at_0).norm < 1e-8);
    const double t0 = eval_trace(*b, u, Trace::ux_at_0).norm;
    CHECK(t0 * t0 == doctest::Approx(trace_ux0_squared(*b, u.coeffs)).epsilon(1e-12));
    CHECK(eval_trace(*b, CoeffField::zero(*b), Trace::ux_at_0).norm == 0.0);
}

TEST_CASE("basis identity")
{
    const auto a = test::basis(6, 6);
    const auto b = test::basis(6, 6);
    const auto c = test::basis(6, 7);
    CHECK(a->id == b->id);
    CHECK(a->id != c->id);
    CHECK(basis_hash_hex(*a).size() == 16);
    CHECK_THROWS_AS(check_field(*a, CoeffField::zero(*c)), ValidationError);
}

TEST_CASE("domain validation")
{
    DomainConfig c;
    c.d = 3;
    CHECK_THROWS_AS(build_basis(c), ValidationError);
    c.d = 1;
    c.n_x = 8;
    c.quad_x = 15;
    CHECK_THROWS_AS(build_basis(c), ValidationError);
    c.quad_x = 0;
    c.n_perp = 0;
    CHECK_THROWS_AS(build_basis(c), ValidationError);
    CHECK_THROWS_AS(transverse_bc_from_string("neumann"), ValidationError);
    DomainConfig ok;
    CHECK(ok.resolved().quad_x == 4 * ok.n_x + 16);
}
