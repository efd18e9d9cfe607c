#include <doctest.h>

#include "support.hpp"
#include "zk/errors.hpp"

using namespace zk;

namespace {

constexpr int kFields = 100;

// [u]_2^2 by quadrature of second derivatives on a refined grid.
double xi1_by_quadrature(const SpectralBasis& b, const Vec& u)
{
    const GridTables g = make_grid(b, 2 * b.grid.quad_x, 2 * b.grid.quad_perp);
    const Mat t = to_tensor(b, u);
    double s = integrate(g, grid_values(b, g, t, 2).cwiseAbs2());
    for (int j = 0; j < b.config.d; ++j) {
        Vec q2(t.cols());
        for (int k = 0; k < t.cols(); ++k) q2[k] = std::pow(b.perp_wavenumbers[b.perp_multi_index[k][j]], 2);
        s += integrate(g, grid_values(b, g, t * q2.asDiagonal(), 0).cwiseAbs2());
    }
    return s;
}

}  // namespace

TEST_CASE("advection term is orthogonal to the field")
{
    for (int d : {1, 2}) {
        const auto b = test::basis(d == 1 ? 16 : 6, d == 1 ? 16 : 5, d);
        const auto ops = assemble_operators(b, 0.7);
        std::mt19937_64 rng(1);
        double worst = 0.0;
        for (int k = 0; k < kFields; ++k) {
            const CoeffField u = test::random_field(*b, rng);
            const double s = std::pow(u.coeffs.norm(), 3);
            worst = std::max(worst, std::abs(apply_B(ops, u).coeffs.dot(u.coeffs)) / s);
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("<Au, u> is half the squared trace of u_x at x = 0")
{
    const auto b = test::basis(16, 16);
    for (double c : {0.0, 0.7, -2.0}) {
        const auto ops = assemble_operators(b, c);
        std::mt19937_64 rng(2);
        double worst = 0.0;
        for (int k = 0; k < kFields; ++k) {
            const CoeffField u = test::random_field(*b, rng);
            const double t = 0.5 * eval_trace(*b, u, Trace::ux_at_0).norm * eval_trace(*b, u, Trace::ux_at_0).norm;
            worst = std::max(worst, test::rel(apply_A(ops, u).coeffs.dot(u.coeffs), t));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("<Lu, u> equals the second-derivative energy")
{
    for (int d : {1, 2}) {
        const auto b = test::basis(d == 1 ? 16 : 6, d == 1 ? 16 : 5, d);
        const auto ops = assemble_operators(b, 0.0);
        std::mt19937_64 rng(3);
        double worst = 0.0;
        for (int k = 0; k < kFields; ++k) {
            const CoeffField u = test::random_field(*b, rng);
            const double lu = apply_L(ops, u).coeffs.dot(u.coeffs);
            CHECK(lu == doctest::Approx(xi1_squared(*b, u.coeffs)).epsilon(1e-14));
            worst = std::max(worst, test::rel(lu, xi1_by_quadrature(*b, u.coeffs)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("bilinear difference identity")
{
    const auto b = test::basis(16, 16);
    const auto ops = assemble_operators(b, 0.0);
    std::mt19937_64 rng(4);
    double worst = 0.0;
    for (int k = 0; k < kFields; ++k) {
        const CoeffField u = test::random_field(*b, rng), v = test::random_field(*b, rng);
        const DifferenceIdentity di = difference_identity(ops, u, v);
        worst = std::max(worst, di.residual / std::max(std::abs(di.lhs), std::abs(di.rhs)));
    }
    CHECK(worst < 1e-8);
    const CoeffField u = test::random_field(*b, rng);
    CHECK(difference_identity_residual(ops, u, u) == 0.0);
}

TEST_CASE("weighted identity closes and the cubic term is resolved")
{
    const auto b = test::basis(16, 16);
    const auto ops = assemble_operators(b, 0.7);
    const GridTables fine = make_grid(*b, 4 * b->grid.quad_x, 4 * b->grid.quad_perp);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        const Vec u = test::random_coeffs(*b, rng), f = test::random_coeffs(*b, rng);
        for (double eps : {0.0, 0.1}) {
            const WeightedIdentity w = weighted_identity(ops, u, eps, &f, true);
            CHECK(test::rel(w.lhs, w.rhs()) < 1e-6);
        }
        CHECK(test::rel(cubic_term(ops, u), cubic_term(ops, u, &fine)) < 1e-8);
    }
}

TEST_CASE("Galerkin A agrees with a grid projection of u_xxx + u_xyy + c u_x")
{
    const auto b = test::basis(10, 8);
    const double c = 1.3;
    const auto ops = assemble_operators(b, c);
    const GridTables g = make_grid(*b, 3 * b->grid.quad_x, 3 * b->grid.quad_perp);
    std::mt19937_64 rng(6);
    const Vec u = test::random_coeffs(*b, rng);
    const Mat t = to_tensor(*b, u);
    const Mat vals = grid_values(*b, g, t, 3) + grid_values(*b, g, t * (-b->perp_q2).asDiagonal(), 1)
                     + c * grid_values(*b, g, t, 1);
    const Vec projected = analyze(*b, g, vals).coeffs;
    const Vec Au = apply_A_raw(ops, u);
    CHECK((Au - projected).norm() < 1e-7 * Au.norm());
    CHECK((ops.A_matrix * u - Au).norm() < 1e-10 * Au.norm());
}

TEST_CASE("pseudospectral B agrees with a refined-grid projection")
{
    const auto b = test::basis(12, 12);
    const auto ops = assemble_operators(b, 0.0);
    const GridTables g = make_grid(*b, 2 * b->grid.quad_x, 2 * b->grid.quad_perp);
    std::mt19937_64 rng(7);
    const Vec u = test::random_coeffs(*b, rng);
    const Mat t = to_tensor(*b, u);
    const Vec ref = analyze(*b, g, grid_values(*b, g, t, 0).cwiseProduct(grid_values(*b, g, t, 1))).coeffs;
    const Vec Bu = apply_B_raw(ops, u);
    CHECK((Bu - ref).norm() < 1e-10 * ref.norm());
}

TEST_CASE("quadratic forms")
{
    const auto b = test::basis(12, 10);
    const auto ops = assemble_operators(b, 0.0);
    std::mt19937_64 rng(8);
    for (int k = 0; k < 10; ++k) {
        const Vec u = test::random_coeffs(*b, rng), v = test::random_coeffs(*b, rng);
        // 1 <= 1 + x <= 2
        CHECK(weighted_l2_squared(ops, u) >= l2_squared(u) * (1 - 1e-12));
        CHECK(weighted_l2_squared(ops, u) <= 2 * l2_squared(u) * (1 + 1e-12));
        CHECK(weighted_inner(ops, u, v) == doctest::Approx(weighted_inner(ops, v, u)).epsilon(1e-12));
        CHECK(weighted_l2_squared(ops, u) == doctest::Approx(u.dot(ops.weight_matrix * u)).epsilon(1e-12));
        CHECK(grad_squared(ops, u) >= ux_squared(ops, u));
        CHECK(weighted_second_squared(ops, u) >= xi1_squared(*b, u) * (1 - 1e-8));
        CHECK(weighted_second_squared(ops, u) <= 2 * xi1_squared(*b, u) * (1 + 1e-8));
    }
}

TEST_CASE("fields from another basis are rejected")
{
    const auto a = test::basis(6, 6);
    const auto other = test::basis(6, 5);
    const auto ops = assemble_operators(a, 0.0);
    CHECK_THROWS_AS(apply_A(ops, CoeffField::zero(*other)), ValidationError);
    CHECK_THROWS_AS(apply_B(ops, CoeffField::zero(*other)), ValidationError);
}
