#include "zk/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "zk/diagnostics.hpp"
#include "zk/ensemble.hpp"
#include "zk/errors.hpp"
#include "zk/operators.hpp"

namespace zk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CheckRow upper(std::string id, std::string ref, double value, double tol)
{
    return {std::move(id), std::move(ref), value, tol, std::isfinite(value) && value <= tol};
}

// |value - target| <= tol, reported as the value itself
CheckRow band(std::string id, std::string ref, double value, double target, double tol)
{
    return {std::move(id), std::move(ref), value, tol, std::isfinite(value) && std::abs(value - target) <= tol};
}

CheckRow lower(std::string id, std::string ref, double value, double tol)
{
    return {std::move(id), std::move(ref), value, tol, std::isfinite(value) && value >= tol};
}

std::string tagged(const std::string& base, const std::string& key, double v)
{
    std::ostringstream s;
    s << base << '[' << key << '=' << v << ']';
    return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

int workers_for(const RunConfig& cfg)
{
    return std::max(cfg.ensemble.workers, static_cast<int>(std::thread::hardware_concurrency()));
}

struct Setup {
    std::shared_ptr<const SpectralBasis> basis;
    GalerkinOperators ops;
    NoiseModel noise;
    CoeffField u0;
    SolverConfig solver;
};

Setup setup(const RunConfig& cfg)
{
    Setup s;
    s.basis = std::make_shared<const SpectralBasis>(build_basis(cfg.domain));
    s.ops = assemble_operators(s.basis, cfg.solver.c);
    s.noise = make_noise(cfg, *s.basis);
    s.u0 = make_initial(cfg, *s.basis);
    s.solver = make_solver_config(cfg);
    s.solver.record_every = 1;
    return s;
}

// min(T, 0.1) rounded to a whole number of steps
double short_horizon(const SolverConfig& s)
{
    const double steps = std::max(1.0, std::round(std::min(s.T, 0.1) / s.dt));
    return steps * s.dt;
}

Vec random_coeffs(const SpectralBasis& b, std::mt19937_64& rng)
{
    std::normal_distribution<double> N;
    Vec v(b.size());
    for (int i = 0; i < b.size(); ++i) v[i] = N(rng) / (1.0 + 0.25 * i);
    return v;
}

double xi1_by_quadrature(const SpectralBasis& b, const GridTables& g, const Vec& u)
{
    const Mat t = to_tensor(b, u);
    double s = integrate(g, grid_values(b, g, t, 2).cwiseAbs2());
    for (int j = 0; j < b.config.d; ++j) {
        Vec q2(t.cols());
        for (int k = 0; k < t.cols(); ++k) q2[k] = std::pow(b.perp_wavenumbers[b.perp_multi_index[k][j]], 2);
        s += integrate(g, grid_values(b, g, t * q2.asDiagonal(), 0).cwiseAbs2());
    }
    return s;
}

double gram_defect(const SpectralBasis& b)
{
    const GridTables g = make_grid(b, 2 * b.grid.quad_x, 2 * b.grid.quad_perp);
    const int P = g.perp_points();
    Mat V(g.quad_x * P, b.size());
    for (int i = 0; i < b.size(); ++i) {
        const Mat vals = synthesize(b, g, CoeffField::of(b, Vec::Unit(b.size(), i)));
        V.col(i) = Eigen::Map<const Vec>(vals.data(), vals.size());
    }
    Vec w(g.quad_x * P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < g.quad_x; ++q) w[p * g.quad_x + q] = g.x_weights[q] * g.w_perp[p];
    const Mat G = V.transpose() * w.asDiagonal() * V;
    return (G - Mat::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
}

// Largest boundary-condition residual, each scaled by the natural size of
// the derivative involved (beta^k for x-modes, q^k for transverse modes).
double bc_defect(const SpectralBasis& b)
{
    double worst = 0.0;
    for (int a = 0; a < b.config.n_x; ++a) {
        const double s = b.x_wavenumbers[a];
        worst = std::max({worst, std::abs(x_mode(b, a, 0.0, 0)), std::abs(x_mode(b, a, 1.0, 0)),
                          std::abs(x_mode(b, a, 1.0, 1)) / s, std::abs(x_mode(b, a, 0.0, 2)) / (s * s)});
    }
    const TransverseBc bc = b.config.transverse_bc;
    for (int j = 0; j < b.config.n_perp; ++j) {
        const double q = std::max(1, perp_wavenumber(bc, j));
        if (bc == TransverseBc::dirichlet) {
            for (double y : {-M_PI / 2, M_PI / 2})
                worst = std::max({worst, std::abs(perp_mode(bc, j, y, 0)), std::abs(perp_mode(bc, j, y, 2)) / (q * q)});
        } else {
            for (int k = 0; k <= 3; ++k)
                worst = std::max(worst, std::abs(perp_mode(bc, j, -M_PI / 2, k) - perp_mode(bc, j, M_PI / 2, k))
                                            / std::pow(q, k));
        }
    }
    return worst;
}

// sum of a ledger column over the whole path
double column_total(const EnergyLedger& L, const std::string& name) { return L.column(name).sum(); }

double order_of(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace

std::vector<CheckRow> identity_suite(const RunConfig& cfg, int fields)
{
    require(fields >= 1, "identity suite needs at least one field");
    const Setup s = setup(cfg);
    const SpectralBasis& b = *s.basis;
    const GalerkinOperators& ops = s.ops;
    const GridTables fine2 = make_grid(b, 2 * b.grid.quad_x, 2 * b.grid.quad_perp);
    const int cubic_fields = b.config.d == 1 ? fields : std::min(fields, 10);
    const GridTables fine4 = make_grid(b, 4 * b.grid.quad_x, 4 * b.grid.quad_perp);

    std::mt19937_64 rng(cfg.ensemble.master_seed ^ 0x1de7u);
    double orth = 0.0, aform = 0.0, lform = 0.0, diff = 0.0, weighted = 0.0, cubic = 0.0;
    for (int k = 0; k < fields; ++k) {
        const CoeffField u = CoeffField::of(b, random_coeffs(b, rng));
        const CoeffField v = CoeffField::of(b, random_coeffs(b, rng));
        const Vec f = random_coeffs(b, rng);

        orth = std::max(orth, std::abs(apply_B(ops, u).coeffs.dot(u.coeffs)) / std::pow(u.coeffs.norm(), 3));
        const double tr = eval_trace(b, u, Trace::ux_at_0).norm;
        aform = std::max(aform, rel(apply_A(ops, u).coeffs.dot(u.coeffs), 0.5 * tr * tr));
        lform = std::max(lform, rel(apply_L(ops, u).coeffs.dot(u.coeffs), xi1_by_quadrature(b, fine2, u.coeffs)));

        const DifferenceIdentity di = difference_identity(ops, u, v);
        diff = std::max(diff, di.residual / std::max({std::abs(di.lhs), std::abs(di.rhs), 1e-300}));

        const WeightedIdentity w = weighted_identity(ops, u.coeffs, cfg.solver.epsilon, &f, true);
        weighted = std::max(weighted, rel(w.lhs, w.rhs()));
        if (k < cubic_fields) cubic = std::max(cubic, rel(cubic_term(ops, u.coeffs), cubic_term(ops, u.coeffs, &fine4)));
    }

    return {
        upper("identities.advection_orthogonality", "advection-orthogonality", orth, 1e-8),
        upper("identities.boundary_form", "boundary-form", aform, 1e-6),
        upper("identities.regularization_form", "regularization-form", lform, 1e-6),
        upper("identities.difference", "bilinear-difference-identity", diff, 1e-8),
        upper("identities.weighted", "weighted-energy-identity", weighted, 1e-6),
        upper("identities.cubic_quadrature", "cubic-quadrature", cubic, 1e-8),
        upper("identities.gram", "basis-orthonormality", gram_defect(b), 1e-10),
        upper("identities.boundary_conditions", "boundary-conditions", bc_defect(b), 1e-8),
    };
}

std::vector<CheckRow> budget_suite(const RunConfig& cfg, int M)
{
    require(M >= 2, "budget suite needs M >= 2");
    const Setup s = setup(cfg);
    const double Th = short_horizon(s.solver);
    const NoiseModel none = zero_noise(*s.basis);
    std::vector<CheckRow> rows;

    // deterministic, linear, unforced
    std::vector<double> plain_det, weighted_det;
    for (int level = 0; level < 3; ++level) {
        SolverConfig c = s.solver;
        c.dt = s.solver.dt / (1 << level);
        c.T = Th;
        c.forcing = {};
        c.nonlinearity_on = false;
        c.substeps = 1;
        const SamplePath p = solve_path(s.u0, c, s.ops, none, 0);
        if (!p.ok) throw NumericalError("deterministic budget run failed: " + p.failure);
        plain_det.push_back(energy_budget(p, s.ops, none).mean_abs_residual());
        weighted_det.push_back(weighted_energy_budget(p, s.ops, none).mean_abs_residual());
    }
    for (int k = 1; k < 3; ++k) {
        rows.push_back(band("budgets.deterministic.order[" + std::to_string(k) + "]", "ito-energy-identity",
                            order_of(plain_det[k - 1], plain_det[k]), 2.0, 0.4));
        rows.push_back(band("budgets.weighted_deterministic.order[" + std::to_string(k) + "]",
                            "weighted-energy-identity", order_of(weighted_det[k - 1], weighted_det[k]), 2.0, 0.4));
    }

    // stochastic from rest, one Brownian path per trajectory shared across dt levels
    const CoeffField zero = CoeffField::zero(*s.basis);
    std::vector<std::array<double, 3>> plain(M), weighted(M);
    std::vector<double> mart(M), wmart(M);
    parallel_for(M, workers_for(cfg), [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.ensemble.master_seed, static_cast<std::uint64_t>(i));
        for (int level = 0; level < 3; ++level) {
            SolverConfig c = s.solver;
            c.T = Th;
            c.substeps = 4 >> level;
            c.dt = s.solver.dt / (1 << level);
            const SamplePath p = solve_path(zero, c, s.ops, s.noise, seed);
            if (!p.ok) {
                plain[i][level] = weighted[i][level] = std::nan("");
                continue;
            }
            const EnergyLedger a = energy_budget(p, s.ops, s.noise);
            const EnergyLedger w = weighted_energy_budget(p, s.ops, s.noise);
            plain[i][level] = a.mean_abs_residual();
            weighted[i][level] = w.mean_abs_residual();
            if (level == 2) {
                mart[i] = column_total(a, "martingale");
                wmart[i] = column_total(w, "martingale");
            }
        }
    });

    auto z_score = [](const std::vector<double>& xs) {
        Welford w;
        for (double x : xs) w.add(x);
        const double se = std::sqrt(w.variance() / static_cast<double>(w.n));
        return se > 0.0 ? std::abs(w.mean) / se : (w.mean == 0.0 ? 0.0 : kInf);
    };
    rows.push_back(upper("budgets.martingale_mean_se", "ito-energy-identity", z_score(mart), 4.0));
    rows.push_back(upper("budgets.weighted_martingale_mean_se", "weighted-energy-identity", z_score(wmart), 4.0));

    auto level_mean = [&](const std::vector<std::array<double, 3>>& r, int level) {
        double sum = 0.0;
        for (const auto& x : r) sum += x[level];
        return sum / static_cast<double>(r.size());
    };
    for (int k = 1; k < 3; ++k) {
        const double rp = level_mean(plain, k - 1) / level_mean(plain, k);
        const double rw = level_mean(weighted, k - 1) / level_mean(weighted, k);
        rows.push_back(band("budgets.residual_ratio[" + std::to_string(k) + "]", "ito-energy-identity", rp, 2.0, 0.4));
        rows.push_back(
            band("budgets.weighted_residual_ratio[" + std::to_string(k) + "]", "weighted-energy-identity", rw, 2.0, 0.4));
    }
    return rows;
}

std::vector<CheckRow> moment_suite(const RunConfig& cfg, int M)
{
    require(M >= 8, "moment suite needs M >= 8");
    const Setup s = setup(cfg);
    EnsembleConfig e = make_ensemble_config(cfg);
    e.M = M;
    e.workers = workers_for(cfg);
    e.solver.record_every = 1;
    const EnsembleStats stats = run_ensemble(e, s.ops, s.noise, s.u0);
    std::vector<CheckRow> rows;
    rows.push_back(upper("moments.blowup_fraction", "moment-bound", static_cast<double>(stats.blowups) / M, 0.1));

    // trajectory order splits the ensemble into a pilot quarter and the rest,
    // and into four disjoint quarters for the width scaling
    const std::vector<double> all = stats.finite_sup_norms();
    std::vector<double> pilot, rest;
    std::array<std::vector<double>, 4> quarters;
    for (int i = 0; i < M; ++i) {
        const double x = stats.sup_norms[static_cast<size_t>(i)];
        if (!std::isfinite(x)) continue;
        (i < M / 4 ? pilot : rest).push_back(x);
        quarters[static_cast<size_t>(std::min(3, 4 * i / M))].push_back(x);
    }
    require(!pilot.empty() && !rest.empty(), "moment suite: every trajectory in a sample failed");

    const int steps = s.solver.steps();
    const double T = s.solver.T;
    for (double p : {2.0, 6.0}) {
        const std::string key = tagged("", "p", p);
        const MomentReport full = moment_estimate(all, p);
        rows.push_back(upper("moments.estimate" + key, "moment-bound", full.estimate, kInf));

        double q2 = 0.0;
        for (const auto& q : quarters) {
            const MomentReport r = moment_estimate(q, p);
            q2 += std::pow(r.ci_high - r.ci_low, 2) / 4.0;
        }
        const double w_q = std::sqrt(q2), w_full = full.ci_high - full.ci_low;
        const double expo = w_full > 0.0 ? std::log(w_q / w_full) / std::log(4.0) : (w_q == 0.0 ? 0.5 : kInf);
        rows.push_back(band("moments.ci_width_exponent" + key, "moment-bound", expo, 0.5, 0.25));

        // int_0^T |f|^p on the step grid
        double forcing = 0.0;
        if (s.solver.forcing)
            for (int m = 0; m <= steps; ++m) {
                const double wgt = (m == 0 || m == steps) ? 0.5 : 1.0;
                forcing += wgt * s.solver.dt * std::pow(s.solver.forcing_at(m * s.solver.dt, s.basis->size()).norm(), p);
            }
        const double initial = std::pow(s.u0.coeffs.norm(), p);
        const MomentReport first = moment_estimate(pilot, p);
        const MomentReport second = moment_estimate(rest, p);
        const double c = fit_moment_constant(first.estimate + 3.0 * first.std_error, T, initial, forcing);
        rows.push_back(upper("moments.fitted_constant" + key, "moment-bound", c, kInf));
        // held-out estimate must not exceed the bound significantly
        rows.push_back(upper("moments.out_of_sample" + key, "moment-bound", second.ci_low,
                             moment_bound(c, T, initial, forcing)));
    }
    return rows;
}

std::vector<CheckRow> uniqueness_suite(const RunConfig& cfg, int seeds, int same_seeds)
{
    require(seeds >= 1 && same_seeds >= 1, "uniqueness suite needs at least one seed");
    const Setup s = setup(cfg);
    const double u0sq = s.u0.coeffs.squaredNorm();
    const double m = 10.0 * (2.0 * u0sq + 1.0);
    const double scale = 1.0 + std::sqrt(u0sq);

    std::vector<double> same(static_cast<size_t>(same_seeds));
    std::vector<UniquenessReport> pert(static_cast<size_t>(seeds));
    const int W = workers_for(cfg);
    parallel_for(same_seeds, W, [&](int i) {
        const UniquenessReport r = uniqueness_experiment(s.solver, s.ops, s.noise, s.u0, m,
                                                         derive_seed(cfg.ensemble.master_seed, i), 0.0);
        same[static_cast<size_t>(i)] = std::sqrt(r.sup_diff);
    });
    parallel_for(seeds, W, [&](int i) {
        pert[static_cast<size_t>(i)] = uniqueness_experiment(s.solver, s.ops, s.noise, s.u0, m,
                                                             derive_seed(cfg.ensemble.master_seed, i), 1e-3);
    });

    int passed = 0;
    double worst_ratio = 0.0, min_tau = kInf;
    for (const auto& r : pert) {
        passed += r.pass ? 1 : 0;
        worst_ratio = std::max(worst_ratio, r.bound > 0.0 ? r.sup_diff / r.bound : kInf);
        min_tau = std::min(min_tau, r.tau_m);
    }
    return {
        upper("uniqueness.same_data_sup_diff", "pathwise-uniqueness", *std::max_element(same.begin(), same.end()),
              1e-10 * scale),
        lower("uniqueness.perturbed_pass_fraction", "pathwise-uniqueness-gronwall",
              static_cast<double>(passed) / seeds, 0.95),
        upper("uniqueness.perturbed_worst_ratio", "pathwise-uniqueness-gronwall", worst_ratio, kInf),
        upper("uniqueness.min_stopping_time", "uniqueness-stopping-time", min_tau, kInf),
    };
}

std::vector<CheckRow> trace_suite(const RunConfig& cfg)
{
    std::vector<double> eps_list{0.25, 0.0625, 0.015625};
    if (cfg.ensemble.sweep && cfg.ensemble.sweep->parameter == "epsilon") {
        eps_list.clear();
        for (double e : cfg.ensemble.sweep->values)
            if (e > 0.0) eps_list.push_back(e);
    }
    require(!eps_list.empty(), "trace suite needs a positive epsilon");

    std::vector<CheckRow> rows;
    double in_basis = 0.0;
    std::vector<std::vector<double>> slopes(eps_list.size());
    const std::vector<int> ns{8, 16, 32};
    for (int n : ns) {
        RunConfig c = cfg;
        c.domain.n_x = c.domain.n_perp = n;
        c.domain.quad_x = c.domain.quad_perp = 0;
        c.noise.modes.clear();
        c.noise.K = std::min(cfg.noise_K(), c.basis_size());
        for (GainSpec* g : {&c.noise.alpha, &c.noise.beta})
            if (g->rule.empty()) g->values.resize(static_cast<size_t>(c.noise.K));
        c.initial.coeffs.resize(std::min(c.initial.coeffs.size(), static_cast<size_t>(c.basis_size())));
        c.solver.forcing.coeffs.resize(std::min(c.solver.forcing.coeffs.size(), static_cast<size_t>(c.basis_size())));
        const Setup s = setup(c);
        SolverConfig sc = s.solver;
        sc.T = short_horizon(sc);
        const auto tr = trace_convergence(eps_list, sc, s.ops, s.noise, s.u0, cfg.ensemble.master_seed);
        for (size_t k = 0; k < tr.size(); ++k) {
            in_basis = std::max(in_basis, tr[k].in_basis);
            slopes[k].push_back(tr[k].grid_slope);
        }
    }
    rows.push_back(upper("traces.in_basis", "trace-at-outflow", in_basis, 1e-8));
    for (size_t k = 0; k < eps_list.size(); ++k)
        for (size_t j = 0; j < ns.size(); ++j) {
            const std::string id = tagged(tagged("traces.grid_slope", "eps", eps_list[k]), "n", ns[j]);
            // nonincreasing along n, with 5% slack for the time average
            const double prev = j == 0 ? kInf : slopes[k][j - 1] * 1.05;
            rows.push_back(upper(id, "trace-convergence", slopes[k][j], prev));
        }
    return rows;
}

std::vector<std::string> suite_names() { return {"identities", "budgets", "moments", "uniqueness", "traces"}; }

std::vector<CheckRow> run_suite(const std::string& name, const RunConfig& cfg)
{
    if (name == "identities") return identity_suite(cfg, 100);
    if (name == "budgets") return budget_suite(cfg, cfg.ensemble.M);
    if (name == "moments") return moment_suite(cfg, cfg.ensemble.M);
    if (name == "uniqueness") return uniqueness_suite(cfg, 100);
    if (name == "traces") return trace_suite(cfg);
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError("--suite: unknown suite '" + name + "' (known: " + known + ")");
}

bool all_pass(const std::vector<CheckRow>& rows)
{
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

}  // namespace zk
