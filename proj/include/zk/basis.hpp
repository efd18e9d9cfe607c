#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class TransverseBc { dirichlet, periodic };

std::string to_string(TransverseBc bc);
TransverseBc transverse_bc_from_string(const std::string& s);

/// Geometry and resolution of the box (0,1) x (-pi/2, pi/2)^d.
///
/// quad_x / quad_perp equal to zero mean "use the default", which is
/// 4n + 16 nodes per direction. That margin is what makes cubic and
/// weighted integrals of the (non-polynomial) modes exact to round-off.
struct DomainConfig {
    int d = 1;
    int n_x = 8;
    int n_perp = 8;
    int quad_x = 0;
    int quad_perp = 0;
    TransverseBc transverse_bc = TransverseBc::dirichlet;

    /// Copy with defaulted quadrature counts filled in.
    DomainConfig resolved() const;
    /// Throws ValidationError on a violated invariant.
    void validate() const;

    bool operator==(const DomainConfig&) const = default;
};

/// Quadrature nodes plus mode tables sampled on a tensor grid.
///
/// Grid values of a field are stored as a quad_x x P matrix, where P is the
/// flattened transverse grid (quad_perp^d points, first transverse direction
/// varying slowest).
struct GridTables {
    int quad_x = 0;
    int quad_perp = 0;
    Vec x_nodes, x_weights;
    Vec perp_nodes, perp_weights;  // 1D transverse rule in y
    Vec w_perp;                    // flattened product weights, length P

    // x-mode tables (quad_x x n_x), derivative orders 0..4
    std::vector<Mat> x_tables;
    // transverse tables (P x n_perp^d): value, then d/dy, d/dz
    Mat perp_value;
    std::vector<Mat> perp_d1;

    // analysis tables with quadrature weights folded in
    Mat x_weighted;     // diag(x_weights) * x_tables[0]
    Mat perp_weighted;  // diag(w_perp) * perp_value

    int perp_points() const { return static_cast<int>(w_perp.size()); }
};

/// Galerkin space spanned by the lowest eigenfunctions of
/// L = d^4/dx^4 + d^4/dy^4 (+ d^4/dz^4) under
///   u = 0 on the boundary, u_x(1) = 0, u_xx(0) = 0, u_yy = u_zz = 0
/// on the transverse walls (Dirichlet case).
///
/// x-modes are w(x) = N (sin(bx) - sin(b) sinh(bx)/sinh(b)) with tan b = tanh b;
/// transverse modes are sines (Dirichlet) or a real Fourier basis
/// (periodic). Modes are tensor products sorted by L-eigenvalue.
struct SpectralBasis {
    DomainConfig config;

    Vec x_wavenumbers;   // beta_a
    Vec x_eigenvalues;   // beta_a^4
    Vec x_norms;         // L^2 normalisation factors

    // endpoint data of the normalised x-modes
    Vec x_value_at_0, x_value_at_1;
    Vec x_dx_at_0, x_dx_at_1;
    Vec x_dxx_at_0, x_dxx_at_1;

    std::vector<int> perp_wavenumbers;  // q_j for each 1D transverse index
    // per flattened transverse index t (n_perp^d of them)
    std::vector<std::vector<int>> perp_multi_index;
    Vec perp_q2;  // sum over directions of q^2
    Vec perp_q4;  // sum over directions of q^4

    // tensor mode i <-> (x index, transverse index)
    std::vector<int> mode_x;
    std::vector<int> mode_perp;
    Eigen::MatrixXi index_of;  // n_x x n_perp^d

    Vec L_eigenvalues;  // sorted nondecreasing

    GridTables grid;
    std::uint64_t id = 0;
    double root_tolerance = 0.0;

    int size() const { return static_cast<int>(mode_x.size()); }
    int perp_modes() const { return static_cast<int>(perp_q2.size()); }
};

/// A snapshot in H^n: one coefficient per tensor mode.
struct CoeffField {
    Vec coeffs;
    std::uint64_t basis_id = 0;

    static CoeffField zero(const SpectralBasis& basis);
    static CoeffField of(const SpectralBasis& basis, Vec coeffs);
    int size() const { return static_cast<int>(coeffs.size()); }
};

/// Throws unless the field lives in the basis and is finite.
void check_field(const SpectralBasis& basis, const CoeffField& field);

SpectralBasis build_basis(const DomainConfig& config);

/// Gauss-Legendre nodes (ascending) and weights on [a, b].
struct GaussRule {
    Vec nodes, weights;
};
GaussRule gauss_legendre(int n, double a, double b);

/// Mode tables on an arbitrary Gauss-type grid. Used for the primary grid and
/// for refined-quadrature oracles.
GridTables make_grid(const SpectralBasis& basis, int quad_x, int quad_perp);

/// Normalised x-mode a (0-based) and its derivative of the given order at x.
double x_mode(const SpectralBasis& basis, int a, double x, int derivative);
/// Normalised 1D transverse mode j at y in (-pi/2, pi/2).
double perp_mode(TransverseBc bc, int j, double y, int derivative);
int perp_wavenumber(TransverseBc bc, int j);

/// Coefficient vector <-> n_x x n_perp^d matrix in (x index, transverse index).
Mat to_tensor(const SpectralBasis& basis, const Vec& coeffs);
Vec from_tensor(const SpectralBasis& basis, const Mat& tensor);

/// Grid values of d^k/dx^k applied to the field. `perp` selects the transverse
/// table: -1 for values, j >= 0 for d/d(transverse direction j).
Mat grid_values(const SpectralBasis& basis, const GridTables& grid, const Mat& tensor,
                int x_derivative, int perp = -1);

Mat synthesize(const SpectralBasis& basis, const CoeffField& field);
CoeffField analyze(const SpectralBasis& basis, const Mat& values);
/// Same, on another grid built by make_grid.
Mat synthesize(const SpectralBasis& basis, const GridTables& grid, const CoeffField& field);
CoeffField analyze(const SpectralBasis& basis, const GridTables& grid, const Mat& values);

/// Quadrature of a grid function.
double integrate(const GridTables& grid, const Mat& values);
/// Quadrature of a grid function against the weight (1 + x).
double integrate_weighted(const GridTables& grid, const Mat& values);

enum class Trace { ux_at_0, ux_at_1, uxx_at_0, uxx_at_1 };

struct TraceProfile {
    Vec profile;  // values on the flattened transverse grid
    double norm = 0.0;  // L^2 over the transverse section
};

TraceProfile eval_trace(const SpectralBasis& basis, const CoeffField& field, Trace which);

/// Squared L^2(I_perp) norm of u_x at x = 0, straight from coefficients.
double trace_ux0_squared(const SpectralBasis& basis, const Vec& coeffs);

/// 64-bit FNV-1a digest of the config and eigenvalues, rendered as hex.
std::string basis_hash_hex(const SpectralBasis& basis);

}  // namespace zk
