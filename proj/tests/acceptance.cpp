// Acceptance run at desk scale: d = 1, n_x = n_perp = 16, dt = 1e-3, T = 1.
// Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// Wall time is printed next to each limit for reference; it is not part of
// the verdict (it depends on the machine).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oracles/fd_beam.hpp"
#include "zk/config.hpp"
#include "zk/ensemble.hpp"
#include "zk/errors.hpp"
#include "zk/gronwall.hpp"
#include "zk/reports.hpp"
#include "zk/verify.hpp"

using namespace zk;

namespace {

const char* kDesk = R"({"domain": {"d": 1, "n_x": 16, "n_perp": 16},
                        "solver": {"dt": 0.001, "T": 1.0},
                        "ensemble": {"M": 400, "master_seed": 20240}})";

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!ok) notes.push_back(what);
    }
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// every row whose id starts with one of the prefixes must pass
void require_rows(Outcome& o, const std::vector<CheckRow>& rows, const std::vector<std::string>& prefixes)
{
    int seen = 0;
    for (const auto& r : rows)
        for (const auto& p : prefixes)
            if (r.check_id.rfind(p, 0) == 0) {
                ++seen;
                o.check(r.pass, r.check_id + " = " + fmt(r.value) + " (tol " + fmt(r.tolerance) + ")");
            }
    o.check(seen > 0, "no rows matched");
}

std::shared_ptr<const SpectralBasis> make_basis(const RunConfig& cfg)
{
    return std::make_shared<const SpectralBasis>(build_basis(cfg.domain));
}

Outcome c1(const RunConfig& cfg)
{
    Outcome o;
    require_rows(o, identity_suite(cfg, 100),
                 {"identities.advection_orthogonality", "identities.boundary_form", "identities.regularization_form",
                  "identities.difference"});
    return o;
}

Outcome c2(const RunConfig& cfg)
{
    Outcome o;
    require_rows(o, identity_suite(cfg, 1), {"identities.gram", "identities.boundary_conditions"});
    const auto b = make_basis(cfg);
    const double fine = oracle::richardson(oracle::fd_beam(4000).lambda, oracle::fd_beam(8000).lambda);
    const double rel = std::abs(b->x_eigenvalues[0] - fine) / fine;
    o.check(rel <= 1e-6, "lambda_1 relative gap " + fmt(rel));
    return o;
}

Outcome c6()
{
    Outcome o;
    std::mt19937_64 rng(6);
    std::lognormal_distribution<double> L(0.0, 1.5);
    std::bernoulli_distribution spike(0.02);
    std::uniform_real_distribution<double> U(0.1, 10.0);
    std::vector<double> t(256);
    for (int i = 0; i < 256; ++i) t[static_cast<size_t>(i)] = i / 255.0;
    int over = 0;
    for (int k = 0; k < 1000; ++k) {
        std::vector<double> M(256);
        for (auto& m : M) m = spike(rng) ? 50.0 * L(rng) : L(rng);
        try {
            const GronwallReport r = build_stopping_times(t, M, U(rng));
            if (r.N > static_cast<int>(std::ceil(2.0 * r.C0 * r.kappa + 1.0))) ++over;
        } catch (const NumericalError&) {
            ++over;
        }
    }
    o.check(over == 0, std::to_string(over) + " of 1000 paths exceeded the cap");

    // X' = M X with X(0) = 0, Y = Z = 0
    std::vector<PathProcess> family;
    std::vector<double> tt(129);
    for (int i = 0; i < 129; ++i) tt[static_cast<size_t>(i)] = i / 128.0;
    for (int k = 0; k < 100; ++k) {
        PathProcess p;
        p.times = tt;
        p.M.resize(129);
        for (auto& m : p.M) m = L(rng);
        p.X.assign(129, 0.0);
        p.Y.assign(129, 0.0);
        p.Z.assign(129, 0.0);
        for (size_t i = 1; i < tt.size(); ++i) {
            const double h = tt[i] - tt[i - 1];
            p.X[i] = p.X[i - 1] * (1 + 0.5 * h * p.M[i - 1]) / (1 - 0.5 * h * p.M[i]);
        }
        family.push_back(std::move(p));
    }
    const GronwallReport w = verify_stochastic_gronwall(family, 1.0, GronwallVariant::weakened);
    o.check(w.pass && w.conclusion_lhs <= 1e-8, "weakened conclusion " + fmt(w.conclusion_lhs));
    return o;
}

// least-squares slope of log y against log x
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / x.size();
        my += std::log(y[i]) / y.size();
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += std::pow(std::log(x[i]) - mx, 2);
    }
    return sxy / sxx;
}

Outcome c7(const RunConfig& desk)
{
    Outcome o;
    std::vector<double> eps;
    for (int k = 2; k <= 10; ++k) eps.push_back(std::ldexp(1.0, -k));
    eps.push_back(0.0);

    // nonlinear problem: per-seed distance decreasing along the sequence
    {
        RunConfig cfg = desk;
        cfg.ensemble.M = 10;
        const auto b = make_basis(cfg);
        const auto ops = assemble_operators(b, cfg.solver.c);
        const SweepTable tab = epsilon_sweep(make_ensemble_config(cfg), eps, ops, make_noise(cfg, *b), make_initial(cfg, *b));
        for (size_t s = 0; s < tab.distance.front().size(); ++s)
            for (size_t k = 1; k + 1 < eps.size(); ++k)
                o.check(tab.distance[k][s] < tab.distance[k - 1][s],
                        "seed " + std::to_string(s) + " not decreasing at eps=" + fmt(eps[k]));
    }
    // linear problem: distance ~ C eps over the smallest values
    {
        RunConfig cfg = desk;
        cfg.domain.n_x = cfg.domain.n_perp = 8;
        cfg.noise.K = 16;
        cfg.solver.nonlinearity = false;
        cfg.ensemble.M = 10;
        const auto b = make_basis(cfg);
        const auto ops = assemble_operators(b, cfg.solver.c);
        const SweepTable tab = epsilon_sweep(make_ensemble_config(cfg), eps, ops, make_noise(cfg, *b), make_initial(cfg, *b));
        const size_t n = eps.size() - 1;
        const std::vector<double> x(eps.begin() + static_cast<long>(n) - 3, eps.begin() + static_cast<long>(n));
        const std::vector<double> y(tab.mean_distance.begin() + static_cast<long>(n) - 3,
                                    tab.mean_distance.begin() + static_cast<long>(n));
        const double slope = loglog_slope(x, y);
        o.check(slope >= 0.8 && slope <= 1.2, "linear slope " + fmt(slope));
        o.notes.push_back("linear slope " + fmt(slope));
    }
    return o;
}

Outcome c8()
{
    Outcome o;
    RunConfig cfg = parse_config(R"({"domain": {"d": 1, "n_x": 16, "n_perp": 16, "transverse_bc": "periodic"},
                                    "solver": {"dt": 0.001, "T": 1.0, "c": 0.3}})");
    const auto b = make_basis(cfg);
    const auto ops = assemble_operators(b, cfg.solver.c);
    CoeffField u0 = CoeffField::zero(*b);
    std::vector<int> modes;
    for (int a = 0; a < 16; ++a) {
        u0.coeffs[b->index_of(a, 0)] = 0.8 / (1 + a);
        if (a < 8) modes.push_back(b->index_of(a, 0));
    }
    const NoiseModel m = make_noise_model(*b, expand_gain_rule("geometric:0.5", 8), expand_gain_rule("geometric:0.5", 8), modes);
    const SamplePath p = solve_path(u0, make_solver_config(cfg), ops, m, 8);
    o.check(p.ok, "run failed: " + p.failure);
    double leak = 0.0;
    for (const auto& u : p.fields)
        for (int i = 0; i < b->size(); ++i)
            if (b->mode_perp[static_cast<size_t>(i)] != 0) leak = std::max(leak, std::abs(u.coeffs[i]));
    o.check(leak <= 1e-10, "transverse leak " + fmt(leak));
    o.check(p.fields.back().coeffs.norm() > 1e-3, "solution decayed to zero, check is vacuous");
    o.notes.push_back("leak " + fmt(leak));
    return o;
}

Outcome c10(const RunConfig& desk)
{
    Outcome o;
    RunConfig cfg = desk;
    cfg.ensemble.M = 40;
    const auto b = make_basis(cfg);
    const auto ops = assemble_operators(b, cfg.solver.c);
    const NoiseModel m = make_noise(cfg, *b);
    const CoeffField u0 = make_initial(cfg, *b);
    std::string text[2];
    int slot = 0;
    for (int workers : {1, 8}) {
        EnsembleConfig e = make_ensemble_config(cfg);
        e.workers = workers;
        text[slot++] = render_csv(stats_table(run_ensemble(e, ops, m, u0)));
    }
    o.check(text[0] == text[1], "stats differ between 1 and 8 workers");
    return o;
}

}  // namespace

int main()
{
    const RunConfig desk = parse_config(kDesk);
    std::vector<CheckRow> budget_rows;
    bool budget_done = false;
    auto budgets = [&]() -> const std::vector<CheckRow>& {
        if (!budget_done) budget_rows = budget_suite(desk, 400);
        budget_done = true;
        return budget_rows;
    };

    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "operator identities", 10, [&] { return c1(desk); }},
        {2, "basis correctness", 30, [&] { return c2(desk); }},
        {3, "energy budget", 180,
         [&] {
             Outcome o;
             require_rows(o, budgets(), {"budgets.deterministic", "budgets.martingale", "budgets.residual_ratio"});
             return o;
         }},
        {4, "weighted energy budget", 120,
         [&] {
             Outcome o;
             require_rows(o, budgets(), {"budgets.weighted"});
             require_rows(o, identity_suite(desk, 100), {"identities.cubic_quadrature", "identities.weighted"});
             return o;
         }},
        {5, "pathwise uniqueness", 120,
         [&] {
             Outcome o;
             require_rows(o, uniqueness_suite(desk, 100), {"uniqueness."});
             return o;
         }},
        {6, "stochastic gronwall", 20, [] { return c6(); }},
        {7, "epsilon to zero", 180, [&] { return c7(desk); }},
        {8, "KdV reduction", 30, [] { return c8(); }},
        {9, "moment bounds", 180,
         [&] {
             Outcome o;
             require_rows(o, moment_suite(desk, 400), {"moments."});
             return o;
         }},
        {10, "reproducibility", 60, [&] { return c10(desk); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.notes.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL") << "  [" << fmt(secs)
                  << " s, limit " << c.limit_s << " s]";
        for (const auto& n : o.notes) std::cout << "; " << n;
        std::cout << std::endl;
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
