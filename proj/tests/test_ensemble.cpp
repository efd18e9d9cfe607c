#include <doctest.h>

#include <atomic>

#include "support.hpp"
#include "zk/ensemble.hpp"
#include "zk/errors.hpp"

using namespace zk;

namespace {

EnsembleConfig ens_config(int M, int workers, double dt = 1e-2, double T = 0.2)
{
    EnsembleConfig e;
    e.M = M;
    e.master_seed = 2024;
    e.workers = workers;
    e.solver.dt = dt;
    e.solver.T = T;
    return e;
}

NoiseModel default_noise(const SpectralBasis& b, int K = 9)
{
    return make_noise_model(b, expand_gain_rule("geometric:0.5", K), expand_gain_rule("geometric:0.5", K));
}

bool same(const Welford& a, const Welford& b) { return a.n == b.n && a.mean == b.mean && a.m2 == b.m2; }

}  // namespace

TEST_CASE("welford matches two-pass statistics and merges exactly")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> N(3.0, 2.0);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = N(rng);
    Welford all, left, right;
    for (size_t i = 0; i < xs.size(); ++i) {
        all.add(xs[i]);
        (i < 377 ? left : right).add(xs[i]);
    }
    double mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean) / (xs.size() - 1);
    CHECK(all.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(all.variance() == doctest::Approx(var).epsilon(1e-12));
    const Welford m = Welford::merge(left, right);
    CHECK(m.n == 1000);
    CHECK(m.mean == doctest::Approx(all.mean).epsilon(1e-13));
    CHECK(m.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    CHECK(same(Welford::merge(Welford{}, all), all));
}

TEST_CASE("parallel_for visits every index once")
{
    for (int workers : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(97);
        parallel_for(97, workers, [&](int i) { hits[static_cast<size_t>(i)]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
    }
}

TEST_CASE("an ensemble of one is the single path")
{
    const auto b = test::basis(6, 6);
    const auto ops = assemble_operators(b, 0.0);
    const NoiseModel m = default_noise(*b);
    CoeffField u0 = CoeffField::zero(*b);
    u0.coeffs[0] = 0.5;
    const EnsembleConfig cfg = ens_config(1, 1);
    const EnsembleStats s = run_ensemble(cfg, ops, m, u0);
    const SamplePath p = solve_path(u0, cfg.solver, ops, m, derive_seed(cfg.master_seed, 0));
    REQUIRE(s.times == p.times);
    for (size_t i = 0; i < p.times.size(); ++i) {
        CHECK(s.l2sq[i].mean == p.fields[i].coeffs.squaredNorm());
        CHECK(s.xi1sq[i].mean == doctest::Approx(xi1_squared(*b, p.fields[i].coeffs)).epsilon(1e-14));
        CHECK(s.trace0[i].mean == doctest::Approx(std::sqrt(trace_ux0_squared(*b, p.fields[i].coeffs))).epsilon(1e-14));
    }
    CHECK(s.sup_norms[0] == path_sup_norm(p));
}

TEST_CASE("results do not depend on the worker count")
{
    const auto b = test::basis(6, 6);
    const auto ops = assemble_operators(b, 0.0);
    const NoiseModel m = default_noise(*b);
    CoeffField u0 = CoeffField::zero(*b);
    u0.coeffs[0] = 0.5;
    const EnsembleStats one = run_ensemble(ens_config(24, 1), ops, m, u0);
    const EnsembleStats eight = run_ensemble(ens_config(24, 8), ops, m, u0);
    REQUIRE(one.times == eight.times);
    for (size_t i = 0; i < one.times.size(); ++i) {
        CHECK(same(one.l2sq[i], eight.l2sq[i]));
        CHECK(same(one.xi1sq[i], eight.xi1sq[i]));
        CHECK(same(one.trace0[i], eight.trace0[i]));
    }
    CHECK(one.sup_norms == eight.sup_norms);
    CHECK(one.l2sq.back().n == 24);
}

TEST_CASE("merging ensembles pools their counts")
{
    const auto b = test::basis(4, 4);
    const auto ops = assemble_operators(b, 0.0);
    const NoiseModel m = default_noise(*b, 4);
    const CoeffField u0 = CoeffField::of(*b, Vec::Unit(b->size(), 0));
    EnsembleConfig c1 = ens_config(5, 1), c2 = ens_config(7, 1);
    c2.master_seed = 99;
    const EnsembleStats a = run_ensemble(c1, ops, m, u0), s = run_ensemble(c2, ops, m, u0);
    const EnsembleStats both = merge(a, s);
    CHECK(both.M() == 12);
    CHECK(both.l2sq.back().n == 12);
    CHECK(both.l2sq.back().mean == doctest::Approx((5 * a.l2sq.back().mean + 7 * s.l2sq.back().mean) / 12));
    CHECK(both.sup_norms.size() == 12);
}

TEST_CASE("blow-ups are counted, not fatal")
{
    const auto b = test::basis(8, 8);
    const auto ops = assemble_operators(b, 0.0);
    CoeffField u0 = CoeffField::zero(*b);
    u0.coeffs[0] = u0.coeffs[1] = 1e4;
    const EnsembleStats s = run_ensemble(ens_config(3, 1, 0.05, 5.0), ops, zero_noise(*b), u0);
    CHECK(s.blowups == 3);
    CHECK(s.failed);
    CHECK(s.n_blowups.back() == 3);
    CHECK(s.finite_sup_norms().empty());
    for (const auto& f : s.failures) CHECK_FALSE(f.empty());
}

TEST_CASE("path distance")
{
    const auto b = test::basis(4, 4);
    const auto ops = assemble_operators(b, 0.0);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.1;
    const NoiseModel m = default_noise(*b, 4);
    const auto [u, v] = solve_pair(CoeffField::of(*b, Vec::Unit(16, 0)), CoeffField::of(*b, Vec::Unit(16, 1)), cfg, ops, m, 1);
    CHECK(path_distance(u, u) == 0.0);
    CHECK(path_distance(u, v) == path_distance(v, u));
    CHECK(path_distance(u, v) > 0.0);
    // at t = 0 the fields are orthonormal, so the integrand starts at 2
    CHECK(path_distance(u, v) <= std::sqrt(2.0 * cfg.T) * 1.01);
}

TEST_CASE("epsilon sweep")
{
    const auto b = test::basis(6, 6);
    const auto ops = assemble_operators(b, 0.0);
    const NoiseModel m = default_noise(*b);
    CoeffField u0 = CoeffField::zero(*b);
    u0.coeffs[0] = 0.5;
    EnsembleConfig cfg = ens_config(4, 2, 1e-3, 0.2);
    const SweepTable tab = epsilon_sweep(cfg, {1.0, 1.0, std::ldexp(1.0, -10), 0.0}, ops, m, u0);
    REQUIRE(tab.mean_distance.size() == 4);
    CHECK(tab.mean_distance[3] == 0.0);
    CHECK(tab.distance[0] == tab.distance[1]);
    CHECK(tab.mean_distance[0] > 10 * tab.mean_distance[2]);
    CHECK_THROWS_AS(epsilon_sweep(cfg, {0.1, 0.2, 0.0}, ops, m, u0), ValidationError);
    CHECK_THROWS_AS(epsilon_sweep(cfg, {0.2, 0.1}, ops, m, u0), ValidationError);
}

TEST_CASE("ensemble config validation")
{
    EnsembleConfig c = ens_config(0, 1);
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ens_config(4, 0);
    CHECK_THROWS_AS(c.validate(), ValidationError);
}
