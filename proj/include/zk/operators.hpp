#pragma once

#include <memory>
#include <vector>

#include "zk/basis.hpp"

namespace zk {

/// Galerkin realisations of
///   A u = Laplacian(u_x) + c u_x,   B(u, v) = u v_x,   L u = sum of 4th derivatives,
/// plus the (1 + x) weight. Transverse modes diagonalise every transverse
/// derivative, so A and the weight are block diagonal with one n_x x n_x
/// block per transverse index; the dense n x n matrices are kept for callers
/// that want them in mode order.
struct GalerkinOperators {
    std::shared_ptr<const SpectralBasis> basis;
    double c = 0.0;

    // 1D x-integrals, (row b, col a) = integral of (. w_a) w_b
    Mat x_d1;        // w_a' w_b
    Mat x_d3;        // w_a''' w_b
    Mat x_grad;      // w_a' w_b'
    Mat x_weight;    // (1 + x) w_a w_b
    Mat x_weight_dd; // (1 + x) w_a'' w_b''

    std::vector<Mat> A_blocks;  // one per transverse index

    Mat A_matrix;       // <A phi_j, phi_i>
    Mat dx_matrix;      // <d/dx phi_j, phi_i>
    Mat weight_matrix;  // <(1 + x) phi_j, phi_i>
    Vec L_diag;
};

GalerkinOperators assemble_operators(std::shared_ptr<const SpectralBasis> basis, double c);

CoeffField apply_A(const GalerkinOperators& ops, const CoeffField& u);
CoeffField apply_B(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v);
CoeffField apply_B(const GalerkinOperators& ops, const CoeffField& u);
CoeffField apply_L(const GalerkinOperators& ops, const CoeffField& u);

// Raw-vector kernels used by the integrator (no validation).
Vec apply_A_raw(const GalerkinOperators& ops, const Vec& u);
Vec apply_B_raw(const GalerkinOperators& ops, const Vec& u);

/// Quadratic forms evaluated from coefficients.
double l2_squared(const Vec& u);
double xi1_squared(const SpectralBasis& basis, const Vec& u);
double ux_squared(const GalerkinOperators& ops, const Vec& u);
double grad_squared(const GalerkinOperators& ops, const Vec& u);
double weighted_l2_squared(const GalerkinOperators& ops, const Vec& u);
/// |sqrt(1+x) u_xx|^2 + sum over transverse directions of |sqrt(1+x) u_yy|^2.
double weighted_second_squared(const GalerkinOperators& ops, const Vec& u);
/// (u, (1 + x) v)
double weighted_inner(const GalerkinOperators& ops, const Vec& u, const Vec& v);

/// Both sides of the bilinear difference identity, R = u - v:
///   (B(u) - B(v), (1+x) R) = (R^2, (1+x) u_x - (v + (1+x) v_x) / 2),
/// each integrated on the quadrature grid.
struct DifferenceIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

DifferenceIdentity difference_identity(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v,
                                       const GridTables* grid = nullptr);
double difference_identity_residual(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v);

/// Weighted energy identity for N(u) = -Au - B(u) - eps L u + f:
///   2 (sqrt(1+x) u, sqrt(1+x) N(u))
///     = -|grad u|^2 - 2|u_x|^2 - (1 - 2 eps)|u_x(0)|^2
///       - 2 eps (|sqrt(1+x) u_xx|^2 + |sqrt(1+x) u_yy|^2 [+ z])
///       + 2 (f, (1+x) u) + (2/3) int u^3 + c |u|^2.
/// `lhs` is computed by differentiating u pointwise on the grid. On the
/// right, the quadratic terms come from the coefficient forms (exact for
/// the default quadrature); forcing and cubic terms are grid quadratures.
struct WeightedIdentity {
    double lhs = 0.0;
    double grad = 0.0;          // |grad u|^2
    double ux = 0.0;            // |u_x|^2
    double trace0 = 0.0;        // |u_x(0)|^2
    double second = 0.0;        // weighted second-derivative sum
    double forcing = 0.0;       // 2 (f, (1+x) u)
    double cubic = 0.0;         // (2/3) int u^3
    double advection = 0.0;     // c |u|^2
    double epsilon = 0.0;
    double rhs() const;
};

WeightedIdentity weighted_identity(const GalerkinOperators& ops, const Vec& u, double epsilon, const Vec* forcing,
                                   bool nonlinear, const GridTables* grid = nullptr);

/// (2/3) * integral of u^3 on the given grid (defaults to the basis grid).
double cubic_term(const GalerkinOperators& ops, const Vec& u, const GridTables* grid = nullptr);

}  // namespace zk
