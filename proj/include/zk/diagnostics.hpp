#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zk/integrator.hpp"

namespace zk {

/// Per-step energy bookkeeping of a path. Modeled columns carry their sign,
/// so actual = sum of modeled columns + residual on every row.
struct EnergyLedger {
    std::vector<std::string> terms;
    std::vector<double> times;  // left end of each step
    Vec actual;
    Mat modeled;  // steps x terms
    Vec residual;

    int steps() const { return static_cast<int>(actual.size()); }
    Vec column(const std::string& name) const;
    double mean_abs_residual() const;
    double max_abs_residual() const;
};

/// d|u|^2 against
///   boundary     -dt |u_x(0)|^2
///   regularization -2 eps dt [u]_2^2
///   forcing      2 dt (f, u)
///   ito          dt |sigma(u)|_HS^2
///   martingale   2 (u, sigma(u) dW)
/// all evaluated at the left end of the step. Needs every step recorded.
EnergyLedger energy_budget(const SamplePath& path, const GalerkinOperators& ops, const NoiseModel& model);

/// d|sqrt(1+x) u|^2 against the weighted identity:
///   grad -dt|grad u|^2, ux -2dt|u_x|^2, trace -(1-2eps)dt|u_x(0)|^2,
///   second -2 eps dt (weighted second derivatives), forcing 2dt(f,(1+x)u),
///   cubic (2/3)dt int u^3, advection c dt |u|^2, ito, martingale,
/// plus `projection`: dt (2 (u, (1+x) P N(u)) - 2 (u, (1+x) N(u))), the part of
/// the pointwise identity the Galerkin projection P does not see.
EnergyLedger weighted_energy_budget(const SamplePath& path, const GalerkinOperators& ops, const NoiseModel& model);

struct MomentReport {
    double p = 2.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int M = 0;
};

/// Allowed exponents: 2, 6, 7, 22/3.
bool is_moment_exponent(double p);

/// Monte Carlo estimate of E sup_t |u(t)|^p with a 95% normal interval.
MomentReport moment_estimate(const std::vector<SamplePath>& paths, double p);
/// Same, from precomputed per-trajectory sup_t |u(t)|.
MomentReport moment_estimate(const std::vector<double>& sup_norms, double p);

double path_sup_norm(const SamplePath& path);

/// exp(c T) (E|u0|^p + int |f|^p + c)
double moment_bound(double c, double T, double initial_moment, double forcing_moment);

/// Smallest c for which moment_bound(c, ...) >= target (bisection).
double fit_moment_constant(double target, double T, double initial_moment, double forcing_moment);

/// (int |h|^p dt + double integral of |h(t)-h(s)|^p / |t-s|^(1+alpha p))^(1/p)
/// with trapezoidal weights, pairs closer than `band` left out. A band of
/// zero means the smallest time spacing.
double fractional_norm(const std::vector<double>& times, const std::vector<Vec>& values, double alpha, double p,
                       double band = 0.0);
double fractional_norm(const SamplePath& path, double alpha, double p);

/// Transverse L^2 norm of u(x_last, .) / (x_last - 1): a one-sided difference
/// for u_x at x = 1 from the outermost grid node, not using the basis BC.
double boundary_slope(const SpectralBasis& basis, const Vec& coeffs);

struct TraceRow {
    double epsilon = 0.0;
    double in_basis = 0.0;     // time average of |u_x(1)| from the modes
    double grid_slope = 0.0;   // time average of boundary_slope
};

std::vector<TraceRow> trace_convergence(const std::vector<double>& epsilons, const SolverConfig& cfg,
                                        const GalerkinOperators& ops, const NoiseModel& model, const CoeffField& u0,
                                        std::uint64_t seed);

struct UniquenessReport {
    double m = 0.0;
    double delta = 0.0;
    double tau_m = 0.0;
    double sup_diff = 0.0;        // sup over [0, tau_m] of |u - v|^2
    double gamma_integral = 0.0;  // int_0^tau_m gamma^2, gamma = |u_x| + |v| + |v_x|
    double rate_integral = 0.0;   // int_0^tau_m (|c| + 2 cU^2 + 8 gamma^2)
    double initial_energy = 0.0;  // |sqrt(1+x)(u0 - v0)|^2
    double bound = 0.0;           // initial_energy * exp(rate_integral)
    double scale = 0.0;           // 1 + |u0|
    bool pass = false;
};

/// Same-noise pair with |u0 - v0| = delta along `direction` (default: first
/// mode), stopped at the first grid time where
///   sup|u|^2 + int|grad u|^2 + sup|v|^2 + int|grad v|^2 >= m.
/// Only d = 1 with Dirichlet transverse walls is covered.
UniquenessReport uniqueness_experiment(const SolverConfig& cfg, const GalerkinOperators& ops,
                                       const NoiseModel& model, const CoeffField& u0, double m,
                                       std::uint64_t seed, double delta,
                                       const std::optional<Vec>& direction = std::nullopt);
UniquenessReport uniqueness_report(const SamplePath& u, const SamplePath& v, const GalerkinOperators& ops,
                                   const NoiseModel& model, double m, double delta);

/// Terms of the linearized energy inequality over an ensemble of
/// solve_linearized paths, and the smallest constant that closes it:
///   E sup|R|^2 + E int|grad R|^2 <= E|R0|^2 + 2 E int|(g,(1+x)R)| + c E int |h|_HS^2.
struct LinearizedEnergyReport {
    double sup_l2 = 0.0;
    double grad_integral = 0.0;
    double initial = 0.0;
    double forcing = 0.0;
    double noise = 0.0;
    double c_required = 0.0;
};

LinearizedEnergyReport linearized_energy(const std::vector<SamplePath>& paths, const GalerkinOperators& ops,
                                         const NoiseModel& h);

}  // namespace zk
