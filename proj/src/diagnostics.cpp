#include "zk/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "zk/errors.hpp"

namespace zk {

Vec EnergyLedger::column(const std::string& name) const
{
    for (size_t j = 0; j < terms.size(); ++j)
        if (terms[j] == name) return modeled.col(static_cast<Eigen::Index>(j));
    throw ValidationError("ledger has no column '" + name + "'");
}

double EnergyLedger::mean_abs_residual() const
{
    return residual.size() == 0 ? 0.0 : residual.cwiseAbs().mean();
}

double EnergyLedger::max_abs_residual() const
{
    return residual.size() == 0 ? 0.0 : residual.cwiseAbs().maxCoeff();
}

namespace {

void check_replayable(const SamplePath& path, const GalerkinOperators& ops, const NoiseModel& model)
{
    require(!path.fields.empty(), "path has no snapshots");
    require(path.fields.size() == path.times.size() && path.steps.size() == path.times.size(),
            "path snapshots are inconsistent");
    for (size_t i = 0; i < path.steps.size(); ++i)
        require(path.steps[i] == static_cast<int>(i),
                "energy budget needs every step recorded (record_every = 1); increments are missing");
    require(model.basis_id == ops.basis->id && path.fields.front().basis_id == ops.basis->id,
            "path, model and operators live in different bases");
    if (!model.is_zero())
        require(path.noise.K == model.K && path.noise.fine_dt > 0.0, "path noise stream does not match the model");
}

Vec increment_at(const SamplePath& path, const NoiseModel& model, int m)
{
    if (model.is_zero()) return Vec::Zero(model.K);
    return path.noise.increment(static_cast<std::uint64_t>(m), path.config.substeps).dW;
}

EnergyLedger make_ledger(std::vector<std::string> terms, int steps)
{
    EnergyLedger l;
    l.terms = std::move(terms);
    l.times.resize(static_cast<size_t>(steps));
    l.actual = Vec::Zero(steps);
    l.modeled = Mat::Zero(steps, static_cast<Eigen::Index>(l.terms.size()));
    l.residual = Vec::Zero(steps);
    return l;
}

void close_ledger(EnergyLedger& l)
{
    for (int m = 0; m < l.steps(); ++m) l.residual[m] = l.actual[m] - l.modeled.row(m).sum();
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f)
{
    double s = 0.0;
    for (size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
    return s;
}

}  // namespace

EnergyLedger energy_budget(const SamplePath& path, const GalerkinOperators& ops, const NoiseModel& model)
{
    check_replayable(path, ops, model);
    const auto& b = *ops.basis;
    const auto& cfg = path.config;
    const int steps = static_cast<int>(path.fields.size()) - 1;
    const int n = b.size();
    const double dt = cfg.dt;
    EnergyLedger l = make_ledger({"boundary", "regularization", "forcing", "ito", "martingale"}, steps);
    for (int m = 0; m < steps; ++m) {
        const Vec& u = path.fields[static_cast<size_t>(m)].coeffs;
        const Vec& un = path.fields[static_cast<size_t>(m) + 1].coeffs;
        const double t = path.times[static_cast<size_t>(m)];
        const Vec dW = increment_at(path, model, m);
        l.times[static_cast<size_t>(m)] = t;
        l.actual[m] = un.squaredNorm() - u.squaredNorm();
        l.modeled(m, 0) = -dt * trace_ux0_squared(b, u);
        l.modeled(m, 1) = -2.0 * cfg.epsilon * dt * xi1_squared(b, u);
        l.modeled(m, 2) = cfg.forcing ? 2.0 * dt * cfg.forcing_at(t, n).dot(u) : 0.0;
        const double hs = hs_norm_raw(model, u, HsTarget::L2);
        l.modeled(m, 3) = dt * hs * hs;
        l.modeled(m, 4) = 2.0 * u.dot(apply_sigma_raw(model, u, dW));
    }
    close_ledger(l);
    return l;
}

EnergyLedger weighted_energy_budget(const SamplePath& path, const GalerkinOperators& ops, const NoiseModel& model)
{
    check_replayable(path, ops, model);
    const auto& b = *ops.basis;
    const auto& cfg = path.config;
    const int steps = static_cast<int>(path.fields.size()) - 1;
    const int n = b.size();
    const double dt = cfg.dt;
    const double eps = cfg.epsilon;
    EnergyLedger l = make_ledger({"grad", "ux", "trace", "second", "forcing", "cubic", "advection", "ito",
                                  "martingale", "projection"},
                                 steps);
    for (int m = 0; m < steps; ++m) {
        const Vec& u = path.fields[static_cast<size_t>(m)].coeffs;
        const Vec& un = path.fields[static_cast<size_t>(m) + 1].coeffs;
        const double t = path.times[static_cast<size_t>(m)];
        const Vec dW = increment_at(path, model, m);
        l.times[static_cast<size_t>(m)] = t;
        l.actual[m] = weighted_l2_squared(ops, un) - weighted_l2_squared(ops, u);

        Vec f;
        if (cfg.forcing) f = cfg.forcing_at(t, n);
        const WeightedIdentity w = weighted_identity(ops, u, eps, cfg.forcing ? &f : nullptr, cfg.nonlinearity_on);

        Vec drift = -apply_A_raw(ops, u) - eps * ops.L_diag.cwiseProduct(u);
        if (cfg.nonlinearity_on) drift -= apply_B_raw(ops, u);
        if (cfg.forcing) drift += f;
        const double galerkin = 2.0 * weighted_inner(ops, u, drift);

        l.modeled(m, 0) = -dt * w.grad;
        l.modeled(m, 1) = -2.0 * dt * w.ux;
        l.modeled(m, 2) = -(1.0 - 2.0 * eps) * dt * w.trace0;
        l.modeled(m, 3) = -2.0 * eps * dt * w.second;
        l.modeled(m, 4) = dt * w.forcing;
        l.modeled(m, 5) = dt * w.cubic;
        l.modeled(m, 6) = dt * w.advection;
        l.modeled(m, 7) = dt * hs_weighted_squared(model, u, ops.weight_matrix);
        l.modeled(m, 8) = 2.0 * weighted_inner(ops, u, apply_sigma_raw(model, u, dW));
        l.modeled(m, 9) = dt * (galerkin - w.lhs);
    }
    close_ledger(l);
    return l;
}

bool is_moment_exponent(double p)
{
    for (double q : {2.0, 6.0, 7.0, 22.0 / 3.0})
        if (std::abs(p - q) <= 1e-12) return true;
    return false;
}

double path_sup_norm(const SamplePath& path)
{
    double s = 0.0;
    for (const auto& f : path.fields) s = std::max(s, f.coeffs.norm());
    return s;
}

MomentReport moment_estimate(const std::vector<double>& sup_norms, double p)
{
    require(!sup_norms.empty(), "moment estimate needs a nonempty ensemble");
    require(p > 0.0 && is_moment_exponent(p), "moment exponent must be one of 2, 6, 7, 22/3");
    MomentReport r;
    r.p = p;
    r.M = static_cast<int>(sup_norms.size());
    double mean = 0.0, m2 = 0.0;
    int k = 0;
    for (double s : sup_norms) {
        const double x = std::pow(s, p);
        ++k;
        const double d = x - mean;
        mean += d / k;
        m2 += d * (x - mean);
    }
    r.estimate = mean;
    r.std_error = r.M > 1 ? std::sqrt(m2 / (r.M - 1) / r.M) : 0.0;
    r.ci_low = std::max(0.0, mean - 1.96 * r.std_error);
    r.ci_high = mean + 1.96 * r.std_error;
    return r;
}

MomentReport moment_estimate(const std::vector<SamplePath>& paths, double p)
{
    std::vector<double> sups;
    sups.reserve(paths.size());
    for (const auto& path : paths) sups.push_back(path_sup_norm(path));
    return moment_estimate(sups, p);
}

double moment_bound(double c, double T, double initial_moment, double forcing_moment)
{
    return std::exp(c * T) * (initial_moment + forcing_moment + c);
}

double fit_moment_constant(double target, double T, double initial_moment, double forcing_moment)
{
    require(T > 0.0, "horizon must be positive");
    if (moment_bound(0.0, T, initial_moment, forcing_moment) >= target) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (moment_bound(hi, T, initial_moment, forcing_moment) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (moment_bound(mid, T, initial_moment, forcing_moment) < target ? lo : hi) = mid;
    }
    return hi;
}

double fractional_norm(const std::vector<double>& times, const std::vector<Vec>& values, double alpha, double p,
                       double band)
{
    require(alpha > 0.0 && alpha < 1.0, "fractional norm needs 0 < alpha < 1");
    require(p >= 2.0, "fractional norm needs p >= 2");
    require(times.size() == values.size(), "times and values differ in length");
    const size_t N = times.size();
    if (N < 2) return 0.0;
    std::vector<double> w(N, 0.0);
    double min_gap = times[1] - times[0];
    for (size_t i = 1; i < N; ++i) {
        const double h = times[i] - times[i - 1];
        require(h > 0.0, "times must be increasing");
        min_gap = std::min(min_gap, h);
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    if (band <= 0.0) band = min_gap * (1.0 - 1e-9);

    double single = 0.0;
    for (size_t i = 0; i < N; ++i) single += w[i] * std::pow(values[i].norm(), p);
    double dbl = 0.0;
    const double expo = 1.0 + alpha * p;
    for (size_t i = 0; i < N; ++i)
        for (size_t j = i + 1; j < N; ++j) {
            const double gap = times[j] - times[i];
            if (gap < band) continue;
            dbl += 2.0 * w[i] * w[j] * std::pow((values[i] - values[j]).norm(), p) / std::pow(gap, expo);
        }
    return std::pow(single + dbl, 1.0 / p);
}

double fractional_norm(const SamplePath& path, double alpha, double p)
{
    std::vector<Vec> values;
    values.reserve(path.fields.size());
    for (const auto& f : path.fields) values.push_back(f.coeffs);
    return fractional_norm(path.times, values, alpha, p, path.config.dt * (1.0 - 1e-9));
}

double boundary_slope(const SpectralBasis& basis, const Vec& coeffs)
{
    const auto& g = basis.grid;
    const int last = g.quad_x - 1;
    const Mat t = to_tensor(basis, coeffs);
    const Vec row = g.x_tables[0].row(last) * t;  // transverse coefficients at x_last
    const Vec profile = g.perp_value * row / (g.x_nodes[last] - 1.0);
    return std::sqrt(profile.cwiseAbs2().dot(g.w_perp));
}

std::vector<TraceRow> trace_convergence(const std::vector<double>& epsilons, const SolverConfig& cfg,
                                        const GalerkinOperators& ops, const NoiseModel& model, const CoeffField& u0,
                                        std::uint64_t seed)
{
    for (size_t i = 0; i < epsilons.size(); ++i) {
        require(epsilons[i] > 0.0, "trace convergence needs positive epsilons");
        if (i > 0) require(epsilons[i] < epsilons[i - 1], "trace convergence needs a decreasing epsilon sequence");
    }
    std::vector<TraceRow> rows;
    for (double eps : epsilons) {
        SolverConfig c = cfg;
        c.epsilon = eps;
        const SamplePath p = solve_path(u0, c, ops, model, seed);
        require(p.ok, "trace convergence run failed: " + p.failure);
        std::vector<double> tr, sl;
        for (const auto& f : p.fields) {
            tr.push_back(eval_trace(*ops.basis, f, Trace::ux_at_1).norm);
            sl.push_back(boundary_slope(*ops.basis, f.coeffs));
        }
        const double span = p.times.back() - p.times.front();
        TraceRow r;
        r.epsilon = eps;
        r.in_basis = span > 0.0 ? trapezoid(p.times, tr) / span : tr.front();
        r.grid_slope = span > 0.0 ? trapezoid(p.times, sl) / span : sl.front();
        rows.push_back(r);
    }
    return rows;
}

UniquenessReport uniqueness_report(const SamplePath& u, const SamplePath& v, const GalerkinOperators& ops,
                                   const NoiseModel& model, double m, double delta)
{
    require(u.times.size() == v.times.size(), "pair paths have different lengths");
    require(m > 0.0, "stopping radius m must be positive");
    const size_t N = u.times.size();
    UniquenessReport r;
    r.m = m;
    r.delta = delta;
    r.scale = 1.0 + u.fields.front().coeffs.norm();
    const Vec R0 = u.fields.front().coeffs - v.fields.front().coeffs;
    r.initial_energy = weighted_l2_squared(ops, R0);

    double sup_u = 0.0, sup_v = 0.0, int_u = 0.0, int_v = 0.0;
    double prev_gu = 0.0, prev_gv = 0.0, prev_gamma = 0.0;
    const double base_rate = std::abs(ops.c) + 2.0 * model.declared_cU * model.declared_cU;
    size_t stop = N - 1;
    for (size_t i = 0; i < N; ++i) {
        const Vec& a = u.fields[i].coeffs;
        const Vec& b = v.fields[i].coeffs;
        const double gu = grad_squared(ops, a), gv = grad_squared(ops, b);
        const double gamma = std::sqrt(ux_squared(ops, a)) + b.norm() + std::sqrt(ux_squared(ops, b));
        if (i > 0) {
            const double h = u.times[i] - u.times[i - 1];
            int_u += 0.5 * h * (gu + prev_gu);
            int_v += 0.5 * h * (gv + prev_gv);
            r.gamma_integral += 0.5 * h * (gamma * gamma + prev_gamma * prev_gamma);
            r.rate_integral += h * base_rate + 4.0 * h * (gamma * gamma + prev_gamma * prev_gamma);
        }
        prev_gu = gu;
        prev_gv = gv;
        prev_gamma = gamma;
        sup_u = std::max(sup_u, a.squaredNorm());
        sup_v = std::max(sup_v, b.squaredNorm());
        r.sup_diff = std::max(r.sup_diff, (a - b).squaredNorm());
        if (sup_u + int_u + sup_v + int_v >= m) {
            stop = i;
            break;
        }
    }
    r.tau_m = u.times[stop];
    r.bound = r.initial_energy * std::exp(r.rate_integral);
    if (delta == 0.0)
        r.pass = std::sqrt(r.sup_diff) <= 1e-10 * r.scale;
    else
        r.pass = r.sup_diff <= r.bound * (1.0 + 1e-12);
    return r;
}

UniquenessReport uniqueness_experiment(const SolverConfig& cfg, const GalerkinOperators& ops,
                                       const NoiseModel& model, const CoeffField& u0, double m,
                                       std::uint64_t seed, double delta, const std::optional<Vec>& direction)
{
    const auto& b = *ops.basis;
    if (b.config.d != 1)
        throw UnsupportedRegime("pathwise uniqueness is only established for d = 1 (two space dimensions); d = "
                                + std::to_string(b.config.d) + " requested");
    if (b.config.transverse_bc != TransverseBc::dirichlet)
        throw UnsupportedRegime("the uniqueness constant chain uses Ladyzhenskaya's inequality for fields vanishing "
                                "on the whole boundary; periodic transverse walls are not covered");
    require(delta >= 0.0 && std::isfinite(delta), "delta must be >= 0");
    require(cfg.epsilon <= 0.5, "the uniqueness bound needs epsilon <= 1/2");
    Vec dir = direction ? *direction : Vec::Unit(b.size(), 0);
    require(dir.size() == b.size() && dir.norm() > 0.0, "perturbation direction must be a nonzero field");
    CoeffField v0 = u0;
    v0.coeffs += delta * dir / dir.norm();
    const auto [pu, pv] = solve_pair(u0, v0, cfg, ops, model, seed);
    if (!pu.ok || !pv.ok) throw NumericalError("uniqueness run failed: " + (pu.ok ? pv.failure : pu.failure));
    return uniqueness_report(pu, pv, ops, model, m, delta);
}

LinearizedEnergyReport linearized_energy(const std::vector<SamplePath>& paths, const GalerkinOperators& ops,
                                         const NoiseModel& h)
{
    require(!paths.empty(), "linearized energy needs a nonempty ensemble");
    LinearizedEnergyReport r;
    const double M = static_cast<double>(paths.size());
    const int n = ops.basis->size();
    for (const auto& p : paths) {
        std::vector<double> grad, work, noise;
        double sup = 0.0;
        for (size_t i = 0; i < p.fields.size(); ++i) {
            const Vec& R = p.fields[i].coeffs;
            sup = std::max(sup, R.squaredNorm());
            grad.push_back(grad_squared(ops, R));
            work.push_back(p.config.forcing ? std::abs(weighted_inner(ops, p.config.forcing_at(p.times[i], n), R)) : 0.0);
            const double hs = hs_norm_raw(h, R, HsTarget::L2);
            noise.push_back(hs * hs);
        }
        r.sup_l2 += sup / M;
        r.grad_integral += trapezoid(p.times, grad) / M;
        r.initial += p.fields.front().coeffs.squaredNorm() / M;
        r.forcing += 2.0 * trapezoid(p.times, work) / M;
        r.noise += trapezoid(p.times, noise) / M;
    }
    const double excess = r.sup_l2 + r.grad_integral - r.initial - r.forcing;
    r.c_required = excess <= 0.0 ? 0.0 : (r.noise > 0.0 ? excess / r.noise : INFINITY);
    return r;
}

}  // namespace zk
