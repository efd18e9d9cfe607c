#include "zk/operators.hpp"

#include <cmath>

#include "zk/errors.hpp"

namespace zk {

namespace {

// integral over (0,1) of weight(x) * w_a^(ka) * w_b^(kb), table (b, a)
Mat x_integral(const SpectralBasis& basis, const GaussRule& rule, int ka, int kb, bool weighted)
{
    const int nx = basis.config.n_x;
    const int nq = static_cast<int>(rule.nodes.size());
    Mat fa(nq, nx), fb(nq, nx);
    for (int q = 0; q < nq; ++q)
        for (int a = 0; a < nx; ++a) {
            fa(q, a) = x_mode(basis, a, rule.nodes[q], ka);
            fb(q, a) = x_mode(basis, a, rule.nodes[q], kb);
        }
    Vec w = rule.weights;
    if (weighted) w = w.cwiseProduct(Vec::Ones(nq) + rule.nodes);
    return fb.transpose() * w.asDiagonal() * fa;
}

// Expand a block-diagonal-in-transverse-index operator into mode order.
Mat expand_blocks(const SpectralBasis& basis, const std::vector<Mat>& blocks)
{
    const int n = basis.size();
    Mat full = Mat::Zero(n, n);
    for (int t = 0; t < basis.perp_modes(); ++t)
        for (int a = 0; a < basis.config.n_x; ++a)
            for (int b = 0; b < basis.config.n_x; ++b)
                full(basis.index_of(b, t), basis.index_of(a, t)) = blocks[static_cast<size_t>(t)](b, a);
    return full;
}

double block_form(const SpectralBasis& basis, const Mat& block, const Vec& u, const Vec* perp_scale = nullptr)
{
    const Mat t = to_tensor(basis, u);
    double acc = 0.0;
    for (int k = 0; k < t.cols(); ++k) {
        const double s = perp_scale ? (*perp_scale)[k] : 1.0;
        if (s == 0.0) continue;
        acc += s * t.col(k).dot(block * t.col(k));
    }
    return acc;
}

void check_pair(const GalerkinOperators& ops, const CoeffField& u)
{
    check_field(*ops.basis, u);
}

}  // namespace

GalerkinOperators assemble_operators(std::shared_ptr<const SpectralBasis> basis, double c)
{
    require(basis != nullptr, "operators need a basis");
    GalerkinOperators ops;
    ops.basis = basis;
    ops.c = c;
    const auto& b = *basis;
    const GaussRule rule = gauss_legendre(std::max(b.config.quad_x, 8 * b.config.n_x + 64), 0.0, 1.0);
    ops.x_d1 = x_integral(b, rule, 1, 0, false);
    ops.x_d3 = x_integral(b, rule, 3, 0, false);
    ops.x_grad = x_integral(b, rule, 1, 1, false);
    ops.x_weight = x_integral(b, rule, 0, 0, true);
    ops.x_weight_dd = x_integral(b, rule, 2, 2, true);

    const int Tn = b.perp_modes();
    ops.A_blocks.resize(static_cast<size_t>(Tn));
    std::vector<Mat> dx_blocks(static_cast<size_t>(Tn), ops.x_d1);
    std::vector<Mat> w_blocks(static_cast<size_t>(Tn), ops.x_weight);
    for (int t = 0; t < Tn; ++t) ops.A_blocks[static_cast<size_t>(t)] = ops.x_d3 + (c - b.perp_q2[t]) * ops.x_d1;

    ops.A_matrix = expand_blocks(b, ops.A_blocks);
    ops.dx_matrix = expand_blocks(b, dx_blocks);
    ops.weight_matrix = expand_blocks(b, w_blocks);
    ops.L_diag = b.L_eigenvalues;
    return ops;
}

Vec apply_A_raw(const GalerkinOperators& ops, const Vec& u)
{
    const auto& b = *ops.basis;
    Mat t = to_tensor(b, u);
    for (int k = 0; k < t.cols(); ++k) t.col(k) = ops.A_blocks[static_cast<size_t>(k)] * t.col(k);
    return from_tensor(b, t);
}

Vec apply_B_raw(const GalerkinOperators& ops, const Vec& u)
{
    const auto& b = *ops.basis;
    const Mat t = to_tensor(b, u);
    const Mat prod = grid_values(b, b.grid, t, 0).cwiseProduct(grid_values(b, b.grid, t, 1));
    return analyze(b, prod).coeffs;
}

CoeffField apply_A(const GalerkinOperators& ops, const CoeffField& u)
{
    check_pair(ops, u);
    return {apply_A_raw(ops, u.coeffs), u.basis_id};
}

CoeffField apply_B(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v)
{
    check_pair(ops, u);
    check_pair(ops, v);
    const auto& b = *ops.basis;
    const Mat prod = grid_values(b, b.grid, to_tensor(b, u.coeffs), 0)
                         .cwiseProduct(grid_values(b, b.grid, to_tensor(b, v.coeffs), 1));
    return analyze(b, prod);
}

CoeffField apply_B(const GalerkinOperators& ops, const CoeffField& u) { return apply_B(ops, u, u); }

CoeffField apply_L(const GalerkinOperators& ops, const CoeffField& u)
{
    check_pair(ops, u);
    return {ops.L_diag.cwiseProduct(u.coeffs), u.basis_id};
}

double l2_squared(const Vec& u) { return u.squaredNorm(); }

double xi1_squared(const SpectralBasis& basis, const Vec& u) { return u.cwiseAbs2().dot(basis.L_eigenvalues); }

double ux_squared(const GalerkinOperators& ops, const Vec& u) { return block_form(*ops.basis, ops.x_grad, u); }

double grad_squared(const GalerkinOperators& ops, const Vec& u)
{
    const auto& b = *ops.basis;
    const Mat t = to_tensor(b, u);
    double transverse = 0.0;
    for (int k = 0; k < t.cols(); ++k) transverse += b.perp_q2[k] * t.col(k).squaredNorm();
    return ux_squared(ops, u) + transverse;
}

double weighted_l2_squared(const GalerkinOperators& ops, const Vec& u)
{
    return block_form(*ops.basis, ops.x_weight, u);
}

double weighted_second_squared(const GalerkinOperators& ops, const Vec& u)
{
    return block_form(*ops.basis, ops.x_weight_dd, u) + block_form(*ops.basis, ops.x_weight, u, &ops.basis->perp_q4);
}

double weighted_inner(const GalerkinOperators& ops, const Vec& u, const Vec& v)
{
    const auto& b = *ops.basis;
    const Mat tu = to_tensor(b, u);
    const Mat tv = to_tensor(b, v);
    double acc = 0.0;
    for (int k = 0; k < tu.cols(); ++k) acc += tu.col(k).dot(ops.x_weight * tv.col(k));
    return acc;
}

DifferenceIdentity difference_identity(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v,
                                       const GridTables* grid)
{
    check_pair(ops, u);
    check_pair(ops, v);
    const auto& b = *ops.basis;
    const GridTables& g = grid ? *grid : b.grid;
    const Mat tu = to_tensor(b, u.coeffs);
    const Mat tv = to_tensor(b, v.coeffs);
    const Mat U = grid_values(b, g, tu, 0), Ux = grid_values(b, g, tu, 1);
    const Mat V = grid_values(b, g, tv, 0), Vx = grid_values(b, g, tv, 1);
    const Mat R = U - V;
    const Mat onepx = (Vec::Ones(g.quad_x) + g.x_nodes).replicate(1, U.cols());

    DifferenceIdentity out;
    const Mat diffB = U.cwiseProduct(Ux) - V.cwiseProduct(Vx);
    out.lhs = integrate_weighted(g, diffB.cwiseProduct(R));
    const Mat kernel = onepx.cwiseProduct(Ux) - 0.5 * (V + onepx.cwiseProduct(Vx));
    out.rhs = integrate(g, R.cwiseAbs2().cwiseProduct(kernel));
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

double difference_identity_residual(const GalerkinOperators& ops, const CoeffField& u, const CoeffField& v)
{
    return difference_identity(ops, u, v).residual;
}

double WeightedIdentity::rhs() const
{
    return -grad - 2.0 * ux - (1.0 - 2.0 * epsilon) * trace0 - 2.0 * epsilon * second + forcing + cubic + advection;
}

WeightedIdentity weighted_identity(const GalerkinOperators& ops, const Vec& u, double epsilon, const Vec* forcing,
                                   bool nonlinear, const GridTables* grid)
{
    const auto& b = *ops.basis;
    const GridTables& g = grid ? *grid : b.grid;
    const Mat t = to_tensor(b, u);
    const Mat& X = g.perp_value;

    // linear part of N assembled on the x side, then one transverse product
    const Mat tu = g.x_tables[0] * t;
    const Mat tx = g.x_tables[1] * t;
    const Mat lin = g.x_tables[3] * t + g.x_tables[1] * (t * (-b.perp_q2).asDiagonal()) + ops.c * tx
                    + epsilon * (g.x_tables[4] * t + tu * b.perp_q4.asDiagonal());
    const Mat U = tu * X.transpose();
    const Mat Ux = tx * X.transpose();
    Mat N = -(lin * X.transpose());
    if (nonlinear) N -= U.cwiseProduct(Ux);
    Mat F;
    if (forcing) {
        F = grid_values(b, g, to_tensor(b, *forcing), 0);
        N += F;
    }

    WeightedIdentity w;
    w.epsilon = epsilon;
    w.lhs = 2.0 * integrate_weighted(g, U.cwiseProduct(N));

    // quadratic terms: the quadrature is exact for them, so use the coefficient forms
    w.ux = ux_squared(ops, u);
    w.grad = grad_squared(ops, u);
    w.second = weighted_second_squared(ops, u);
    w.trace0 = trace_ux0_squared(b, u);
    w.advection = ops.c * l2_squared(u);

    w.forcing = forcing ? 2.0 * integrate_weighted(g, F.cwiseProduct(U)) : 0.0;
    w.cubic = nonlinear ? (2.0 / 3.0) * integrate(g, U.cwiseAbs2().cwiseProduct(U)) : 0.0;
    return w;
}

double cubic_term(const GalerkinOperators& ops, const Vec& u, const GridTables* grid)
{
    const auto& b = *ops.basis;
    const GridTables& g = grid ? *grid : b.grid;
    const Mat U = grid_values(b, g, to_tensor(b, u), 0);
    return (2.0 / 3.0) * integrate(g, U.cwiseAbs2().cwiseProduct(U));
}

}  // namespace zk
