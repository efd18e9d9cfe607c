#include "zk/basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <tuple>

#include "zk/errors.hpp"

namespace zk {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

GaussRule gauss_legendre(int n, double a, double b)
{
    require(n >= 1, "Gauss-Legendre rule needs at least one node");
    GaussRule rule{Vec(n), Vec(n)};
    // Newton on the Legendre three-term recurrence, Chebyshev-like start.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
        rule.nodes[i] = mid - rad * z;
        rule.nodes[n - 1 - i] = mid + rad * z;
        rule.weights[i] = rule.weights[n - 1 - i] = rad * w;
    }
    return rule;
}

namespace {

GaussRule transverse_rule(TransverseBc bc, int n)
{
    if (bc == TransverseBc::dirichlet) return gauss_legendre(n, -kPi / 2, kPi / 2);
    GaussRule rule{Vec(n), Vec::Constant(n, kPi / n)};
    for (int j = 0; j < n; ++j) rule.nodes[j] = -kPi / 2 + kPi * j / n;
    return rule;
}

// Characteristic function of the pinned/clamped problem, divided by cosh(b):
// sin(b) - tanh(b) cos(b).
double characteristic(double b) { return std::sin(b) - std::tanh(b) * std::cos(b); }

double characteristic_slope(double b)
{
    const double t = std::tanh(b);
    return std::cos(b) - (1.0 - t * t) * std::cos(b) + t * std::sin(b);
}

// a-th root (1-based) of tan(b) = tanh(b); it lies in (a pi, a pi + pi/2).
double solve_wavenumber(int a, double& residual)
{
    double lo = a * kPi;
    double hi = a * kPi + kPi / 2;
    double flo = characteristic(lo);
    double b = a * kPi + kPi / 4;
    for (int it = 0; it < 200; ++it) {
        const double f = characteristic(b);
        if (f == 0.0) break;
        if ((f < 0) == (flo < 0)) {
            lo = b;
            flo = f;
        } else {
            hi = b;
        }
        double next = b - f / characteristic_slope(b);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - b) <= 4e-16 * b) {
            b = next;
            residual = std::abs(characteristic(b));
            return b;
        }
        b = next;
    }
    residual = std::abs(characteristic(b));
    if (residual > 1e-12) {
        std::ostringstream os;
        os << "x-eigenvalue solve did not converge for mode index " << a << " (residual " << residual << ")";
        throw NumericalError(os.str());
    }
    return b;
}

// sinh(b x)/sinh(b) and cosh(b x)/sinh(b) without overflow.
double sinh_ratio(double b, double x)
{
    return std::exp(b * (x - 1.0)) * (1.0 - std::exp(-2.0 * b * x)) / (1.0 - std::exp(-2.0 * b));
}

double cosh_ratio(double b, double x)
{
    return std::exp(b * (x - 1.0)) * (1.0 + std::exp(-2.0 * b * x)) / (1.0 - std::exp(-2.0 * b));
}

// Unnormalised x-mode derivative of order k.
double raw_x_mode(double b, double x, int k)
{
    const double sb = std::sin(b);
    const double bk = std::pow(b, k);
    // d^k sin(bx) = b^k sin(bx + k pi/2); sinh alternates sinh/cosh.
    const double trig = bk * std::sin(b * x + k * kPi / 2);
    const double hyp = bk * ((k % 2 == 0) ? sinh_ratio(b, x) : cosh_ratio(b, x));
    return trig - sb * hyp;
}

}  // namespace

std::string to_string(TransverseBc bc) { return bc == TransverseBc::dirichlet ? "dirichlet" : "periodic"; }

TransverseBc transverse_bc_from_string(const std::string& s)
{
    if (s == "dirichlet") return TransverseBc::dirichlet;
    if (s == "periodic") return TransverseBc::periodic;
    throw ValidationError("domain.transverse_bc must be \"dirichlet\" or \"periodic\", got \"" + s + "\"");
}

DomainConfig DomainConfig::resolved() const
{
    DomainConfig out = *this;
    if (out.quad_x == 0) out.quad_x = 4 * n_x + 16;
    if (out.quad_perp == 0) out.quad_perp = 4 * n_perp + 16;
    return out;
}

void DomainConfig::validate() const
{
    require(d == 1 || d == 2, "domain.d must be 1 or 2");
    require(n_x >= 1, "domain.n_x must be >= 1");
    require(n_perp >= 1, "domain.n_perp must be >= 1");
    const DomainConfig r = resolved();
    require(r.quad_x >= 2 * n_x, "domain.quad_x must be >= 2*n_x (dealiasing margin)");
    require(r.quad_perp >= 2 * n_perp, "domain.quad_perp must be >= 2*n_perp (dealiasing margin)");
}

CoeffField CoeffField::zero(const SpectralBasis& basis) { return {Vec::Zero(basis.size()), basis.id}; }

CoeffField CoeffField::of(const SpectralBasis& basis, Vec coeffs)
{
    require(coeffs.size() == basis.size(), "coefficient vector length does not match basis size");
    return {std::move(coeffs), basis.id};
}

void check_field(const SpectralBasis& basis, const CoeffField& field)
{
    if (field.basis_id != basis.id) throw ValidationError("field belongs to a different basis");
    if (field.coeffs.size() != basis.size()) throw ValidationError("field length does not match basis mode count");
    if (!field.coeffs.allFinite()) throw ValidationError("field has non-finite coefficients");
}

int perp_wavenumber(TransverseBc bc, int j)
{
    if (bc == TransverseBc::dirichlet) return j + 1;
    return 2 * ((j + 1) / 2);
}

double perp_mode(TransverseBc bc, int j, double y, int derivative)
{
    const double s = y + kPi / 2;
    const int q = perp_wavenumber(bc, j);
    const double amp = std::sqrt(2.0 / kPi);
    if (bc == TransverseBc::dirichlet)
        return amp * std::pow(q, derivative) * std::sin(q * s + derivative * kPi / 2);
    if (j == 0) return derivative == 0 ? 1.0 / std::sqrt(kPi) : 0.0;
    if (j % 2 == 1) return amp * std::pow(q, derivative) * std::cos(q * s + derivative * kPi / 2);
    return amp * std::pow(q, derivative) * std::sin(q * s + derivative * kPi / 2);
}

double x_mode(const SpectralBasis& basis, int a, double x, int derivative)
{
    return basis.x_norms[a] * raw_x_mode(basis.x_wavenumbers[a], x, derivative);
}

GridTables make_grid(const SpectralBasis& basis, int quad_x, int quad_perp)
{
    const auto& cfg = basis.config;
    GridTables g;
    g.quad_x = quad_x;
    g.quad_perp = quad_perp;
    auto xr = gauss_legendre(quad_x, 0.0, 1.0);
    g.x_nodes = xr.nodes;
    g.x_weights = xr.weights;
    auto pr = transverse_rule(cfg.transverse_bc, quad_perp);
    g.perp_nodes = pr.nodes;
    g.perp_weights = pr.weights;

    g.x_tables.assign(5, Mat(quad_x, cfg.n_x));
    for (int k = 0; k <= 4; ++k)
        for (int q = 0; q < quad_x; ++q)
            for (int a = 0; a < cfg.n_x; ++a) g.x_tables[k](q, a) = x_mode(basis, a, g.x_nodes[q], k);

    // 1D transverse tables
    Mat s0(quad_perp, cfg.n_perp), s1(quad_perp, cfg.n_perp);
    for (int p = 0; p < quad_perp; ++p)
        for (int j = 0; j < cfg.n_perp; ++j) {
            s0(p, j) = perp_mode(cfg.transverse_bc, j, g.perp_nodes[p], 0);
            s1(p, j) = perp_mode(cfg.transverse_bc, j, g.perp_nodes[p], 1);
        }

    if (cfg.d == 1) {
        g.w_perp = g.perp_weights;
        g.perp_value = s0;
        g.perp_d1 = {s1};
    } else {
        const int P = quad_perp * quad_perp;
        const int Tn = cfg.n_perp * cfg.n_perp;
        g.w_perp.resize(P);
        g.perp_value.resize(P, Tn);
        g.perp_d1.assign(2, Mat(P, Tn));
        for (int p1 = 0; p1 < quad_perp; ++p1)
            for (int p2 = 0; p2 < quad_perp; ++p2) {
                const int p = p1 * quad_perp + p2;
                g.w_perp[p] = g.perp_weights[p1] * g.perp_weights[p2];
                for (int j1 = 0; j1 < cfg.n_perp; ++j1)
                    for (int j2 = 0; j2 < cfg.n_perp; ++j2) {
                        const int t = j1 * cfg.n_perp + j2;
                        g.perp_value(p, t) = s0(p1, j1) * s0(p2, j2);
                        g.perp_d1[0](p, t) = s1(p1, j1) * s0(p2, j2);
                        g.perp_d1[1](p, t) = s0(p1, j1) * s1(p2, j2);
                    }
            }
    }
    g.x_weighted = g.x_weights.asDiagonal() * g.x_tables[0];
    g.perp_weighted = g.w_perp.asDiagonal() * g.perp_value;
    return g;
}

SpectralBasis build_basis(const DomainConfig& input)
{
    input.validate();
    SpectralBasis b;
    b.config = input.resolved();
    const auto& cfg = b.config;

    b.x_wavenumbers.resize(cfg.n_x);
    b.x_eigenvalues.resize(cfg.n_x);
    b.x_norms = Vec::Ones(cfg.n_x);
    double worst = 0.0;
    for (int a = 0; a < cfg.n_x; ++a) {
        double res = 0.0;
        b.x_wavenumbers[a] = solve_wavenumber(a + 1, res);
        worst = std::max(worst, res);
        b.x_eigenvalues[a] = std::pow(b.x_wavenumbers[a], 4);
    }
    b.root_tolerance = worst;

    // normalise with a rule that is far finer than any mode
    const auto fine = gauss_legendre(8 * cfg.n_x + 64, 0.0, 1.0);
    for (int a = 0; a < cfg.n_x; ++a) {
        double acc = 0.0;
        for (int q = 0; q < fine.nodes.size(); ++q) {
            const double w = raw_x_mode(b.x_wavenumbers[a], fine.nodes[q], 0);
            acc += fine.weights[q] * w * w;
        }
        b.x_norms[a] = 1.0 / std::sqrt(acc);
    }

    auto endpoint = [&](double x, int k) {
        Vec v(cfg.n_x);
        for (int a = 0; a < cfg.n_x; ++a) v[a] = x_mode(b, a, x, k);
        return v;
    };
    b.x_value_at_0 = endpoint(0.0, 0);
    b.x_value_at_1 = endpoint(1.0, 0);
    b.x_dx_at_0 = endpoint(0.0, 1);
    b.x_dx_at_1 = endpoint(1.0, 1);
    b.x_dxx_at_0 = endpoint(0.0, 2);
    b.x_dxx_at_1 = endpoint(1.0, 2);

    b.perp_wavenumbers.resize(cfg.n_perp);
    for (int j = 0; j < cfg.n_perp; ++j) b.perp_wavenumbers[j] = perp_wavenumber(cfg.transverse_bc, j);

    const int Tn = cfg.d == 1 ? cfg.n_perp : cfg.n_perp * cfg.n_perp;
    b.perp_multi_index.resize(Tn);
    b.perp_q2.resize(Tn);
    b.perp_q4.resize(Tn);
    for (int t = 0; t < Tn; ++t) {
        std::vector<int> idx = cfg.d == 1 ? std::vector<int>{t} : std::vector<int>{t / cfg.n_perp, t % cfg.n_perp};
        double q2 = 0.0, q4 = 0.0;
        for (int j : idx) {
            const double q = b.perp_wavenumbers[j];
            q2 += q * q;
            q4 += q * q * q * q;
        }
        b.perp_multi_index[t] = std::move(idx);
        b.perp_q2[t] = q2;
        b.perp_q4[t] = q4;
    }

    // tensor modes sorted by eigenvalue; ties by (x index, transverse indices)
    struct Mode {
        double lambda;
        int a;
        int t;
    };
    std::vector<Mode> modes;
    modes.reserve(static_cast<size_t>(cfg.n_x) * Tn);
    for (int a = 0; a < cfg.n_x; ++a)
        for (int t = 0; t < Tn; ++t) modes.push_back({b.x_eigenvalues[a] + b.perp_q4[t], a, t});
    std::stable_sort(modes.begin(), modes.end(), [&](const Mode& l, const Mode& r) {
        return std::tie(l.lambda, l.a, b.perp_multi_index[l.t]) < std::tie(r.lambda, r.a, b.perp_multi_index[r.t]);
    });
    const int n = static_cast<int>(modes.size());
    b.mode_x.resize(n);
    b.mode_perp.resize(n);
    b.L_eigenvalues.resize(n);
    b.index_of.resize(cfg.n_x, Tn);
    for (int i = 0; i < n; ++i) {
        b.mode_x[i] = modes[i].a;
        b.mode_perp[i] = modes[i].t;
        b.L_eigenvalues[i] = modes[i].lambda;
        b.index_of(modes[i].a, modes[i].t) = i;
    }

    b.grid = make_grid(b, cfg.quad_x, cfg.quad_perp);

    // identity digest
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const int header[6] = {cfg.d, cfg.n_x, cfg.n_perp, cfg.quad_x, cfg.quad_perp,
                           cfg.transverse_bc == TransverseBc::dirichlet ? 0 : 1};
    mix(header, sizeof(header));
    mix(b.L_eigenvalues.data(), sizeof(double) * static_cast<size_t>(n));
    b.id = h;
    return b;
}

Mat to_tensor(const SpectralBasis& basis, const Vec& coeffs)
{
    Mat t(basis.config.n_x, basis.perp_modes());
    for (int i = 0; i < basis.size(); ++i) t(basis.mode_x[i], basis.mode_perp[i]) = coeffs[i];
    return t;
}

Vec from_tensor(const SpectralBasis& basis, const Mat& tensor)
{
    Vec c(basis.size());
    for (int i = 0; i < basis.size(); ++i) c[i] = tensor(basis.mode_x[i], basis.mode_perp[i]);
    return c;
}

Mat grid_values(const SpectralBasis&, const GridTables& grid, const Mat& tensor, int x_derivative, int perp)
{
    const Mat& X = grid.x_tables.at(static_cast<size_t>(x_derivative));
    const Mat& T = perp < 0 ? grid.perp_value : grid.perp_d1.at(static_cast<size_t>(perp));
    return (X * tensor) * T.transpose();
}

Mat synthesize(const SpectralBasis& basis, const GridTables& grid, const CoeffField& field)
{
    check_field(basis, field);
    return grid_values(basis, grid, to_tensor(basis, field.coeffs), 0);
}

CoeffField analyze(const SpectralBasis& basis, const GridTables& grid, const Mat& values)
{
    if (values.rows() != grid.quad_x || values.cols() != grid.perp_points())
        throw ValidationError("grid shape does not match quadrature grid");
    const Mat tensor = grid.x_weighted.transpose() * values * grid.perp_weighted;
    return {from_tensor(basis, tensor), basis.id};
}

Mat synthesize(const SpectralBasis& basis, const CoeffField& field) { return synthesize(basis, basis.grid, field); }

CoeffField analyze(const SpectralBasis& basis, const Mat& values) { return analyze(basis, basis.grid, values); }

double integrate(const GridTables& grid, const Mat& values)
{
    return grid.x_weights.dot(values * grid.w_perp);
}

double integrate_weighted(const GridTables& grid, const Mat& values)
{
    const Vec wx = grid.x_weights.cwiseProduct((Vec::Ones(grid.quad_x) + grid.x_nodes));
    return wx.dot(values * grid.w_perp);
}

TraceProfile eval_trace(const SpectralBasis& basis, const CoeffField& field, Trace which)
{
    check_field(basis, field);
    const Vec* endpoint = nullptr;
    switch (which) {
    case Trace::ux_at_0: endpoint = &basis.x_dx_at_0; break;
    case Trace::ux_at_1: endpoint = &basis.x_dx_at_1; break;
    case Trace::uxx_at_0: endpoint = &basis.x_dxx_at_0; break;
    case Trace::uxx_at_1: endpoint = &basis.x_dxx_at_1; break;
    }
    const Vec perp_coeffs = to_tensor(basis, field.coeffs).transpose() * (*endpoint);
    TraceProfile out;
    out.profile = basis.grid.perp_value * perp_coeffs;
    out.norm = std::sqrt(std::max(0.0, out.profile.cwiseAbs2().dot(basis.grid.w_perp)));
    return out;
}

double trace_ux0_squared(const SpectralBasis& basis, const Vec& coeffs)
{
    const Vec perp_coeffs = to_tensor(basis, coeffs).transpose() * basis.x_dx_at_0;
    return perp_coeffs.squaredNorm();
}

std::string basis_hash_hex(const SpectralBasis& basis)
{
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << basis.id;
    return os.str();
}

}  // namespace zk
