#include "zk/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "zk/errors.hpp"
#include "zk/rng.hpp"

namespace zk {

void EnsembleConfig::validate() const
{
    require(M >= 1, "ensemble.M must be >= 1");
    require(workers >= 1, "ensemble.workers must be >= 1");
    solver.validate();
    if (sweep) {
        const auto& p = sweep->parameter;
        require(p == "epsilon" || p == "n" || p == "dt", "ensemble.sweep.parameter must be epsilon, n or dt");
        require(!sweep->values.empty(), "ensemble.sweep.values must be nonempty");
    }
}

void Welford::add(double x)
{
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
}

Welford Welford::merge(const Welford& a, const Welford& b)
{
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    Welford out;
    out.n = a.n + b.n;
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n), nn = static_cast<double>(out.n);
    const double d = b.mean - a.mean;
    out.mean = a.mean + d * nb / nn;
    out.m2 = a.m2 + b.m2 + d * d * na * nb / nn;
    return out;
}

std::vector<double> EnsembleStats::finite_sup_norms() const
{
    std::vector<double> out;
    for (double s : sup_norms)
        if (std::isfinite(s)) out.push_back(s);
    return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn)
{
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

struct TrajectorySeries {
    std::vector<double> l2sq, xi1sq, trace0;  // per slot, only for slots reached
    double sup = 0.0;
    std::string failure;
};

std::vector<int> slot_steps(const SolverConfig& cfg)
{
    std::vector<int> out;
    const int N = cfg.steps();
    for (int m = 0; m <= N; m += cfg.record_every) out.push_back(m);
    if (out.back() != N) out.push_back(N);
    return out;
}

}  // namespace

EnsembleStats run_ensemble(const EnsembleConfig& cfg, const GalerkinOperators& ops, const NoiseModel& model,
                           const CoeffField& u0)
{
    return run_ensemble(cfg, ops, model, u0, nullptr);
}

EnsembleStats run_ensemble(const EnsembleConfig& cfg, const GalerkinOperators& ops, const NoiseModel& model,
                           const CoeffField& u0, const std::function<void(int, const SamplePath&)>& observer)
{
    cfg.validate();
    const Stepper stepper(ops, cfg.solver);
    const auto& b = *ops.basis;
    const std::vector<int> slots = slot_steps(cfg.solver);
    std::map<int, size_t> slot_of;
    for (size_t s = 0; s < slots.size(); ++s) slot_of[slots[s]] = s;

    std::vector<TrajectorySeries> series(static_cast<size_t>(cfg.M));
    parallel_for(cfg.M, cfg.workers, [&](int i) {
        const SamplePath p = solve_path(u0, stepper, model, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i)));
        auto& s = series[static_cast<size_t>(i)];
        for (size_t k = 0; k < p.fields.size(); ++k) {
            const auto it = slot_of.find(p.steps[k]);
            if (it == slot_of.end() || (!p.ok && k + 1 == p.fields.size())) continue;
            const Vec& u = p.fields[k].coeffs;
            s.l2sq.push_back(u.squaredNorm());
            s.xi1sq.push_back(xi1_squared(b, u));
            s.trace0.push_back(std::sqrt(trace_ux0_squared(b, u)));
        }
        s.failure = p.failure;
        s.sup = p.ok ? path_sup_norm(p) : NAN;
        if (observer) observer(i, p);
    });

    // deterministic reduction in trajectory order
    EnsembleStats st;
    const size_t S = slots.size();
    st.times.resize(S);
    for (size_t k = 0; k < S; ++k) st.times[k] = slots[k] * cfg.solver.dt;
    st.l2sq.assign(S, {});
    st.xi1sq.assign(S, {});
    st.trace0.assign(S, {});
    st.n_blowups.assign(S, 0);
    for (const auto& s : series) {
        for (size_t k = 0; k < s.l2sq.size(); ++k) {
            st.l2sq[k].add(s.l2sq[k]);
            st.xi1sq[k].add(s.xi1sq[k]);
            st.trace0[k].add(s.trace0[k]);
        }
        if (!s.failure.empty()) {
            ++st.blowups;
            for (size_t k = s.l2sq.size(); k < S; ++k) ++st.n_blowups[k];
        }
        st.sup_norms.push_back(s.sup);
        st.failures.push_back(s.failure);
    }
    st.failed = st.blowups > 0.1 * cfg.M;
    return st;
}

EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b)
{
    require(a.times == b.times, "cannot merge ensembles on different time grids");
    EnsembleStats out = a;
    for (size_t k = 0; k < a.times.size(); ++k) {
        out.l2sq[k] = Welford::merge(a.l2sq[k], b.l2sq[k]);
        out.xi1sq[k] = Welford::merge(a.xi1sq[k], b.xi1sq[k]);
        out.trace0[k] = Welford::merge(a.trace0[k], b.trace0[k]);
        out.n_blowups[k] = a.n_blowups[k] + b.n_blowups[k];
    }
    out.sup_norms.insert(out.sup_norms.end(), b.sup_norms.begin(), b.sup_norms.end());
    out.failures.insert(out.failures.end(), b.failures.begin(), b.failures.end());
    out.blowups = a.blowups + b.blowups;
    out.failed = out.blowups > 0.1 * out.M();
    return out;
}

double path_distance(const SamplePath& u, const SamplePath& v)
{
    require(u.times.size() == v.times.size(), "paths must share snapshot times");
    double s = 0.0;
    double prev = (u.fields[0].coeffs - v.fields[0].coeffs).squaredNorm();
    for (size_t i = 1; i < u.times.size(); ++i) {
        const double cur = (u.fields[i].coeffs - v.fields[i].coeffs).squaredNorm();
        s += 0.5 * (u.times[i] - u.times[i - 1]) * (cur + prev);
        prev = cur;
    }
    return std::sqrt(s);
}

SweepTable epsilon_sweep(const EnsembleConfig& cfg, const std::vector<double>& eps_list,
                         const GalerkinOperators& ops, const NoiseModel& model, const CoeffField& u0)
{
    cfg.validate();
    require(!eps_list.empty() && eps_list.back() == 0.0, "epsilon sweep must end with 0");
    for (size_t i = 0; i < eps_list.size(); ++i) {
        require(eps_list[i] >= 0.0, "epsilon values must be >= 0");
        if (i > 0) require(eps_list[i] <= eps_list[i - 1], "epsilon sweep must be nonincreasing");
    }
    std::vector<Stepper> steppers;
    for (double e : eps_list) {
        SolverConfig c = cfg.solver;
        c.epsilon = e;
        steppers.emplace_back(ops, c);
    }
    SweepTable tab;
    tab.epsilons = eps_list;
    tab.distance.assign(eps_list.size(), std::vector<double>(static_cast<size_t>(cfg.M), NAN));
    parallel_for(cfg.M, cfg.workers, [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
        const SamplePath ref = solve_path(u0, steppers.back(), model, seed);
        if (!ref.ok) return;
        for (size_t e = 0; e < eps_list.size(); ++e) {
            const SamplePath p = solve_path(u0, steppers[e], model, seed);
            if (p.ok) tab.distance[e][static_cast<size_t>(i)] = path_distance(p, ref);
        }
    });
    for (const auto& row : tab.distance) {
        double s = 0.0;
        int k = 0;
        for (double d : row)
            if (std::isfinite(d)) {
                s += d;
                ++k;
            }
        tab.mean_distance.push_back(k > 0 ? s / k : NAN);
    }
    return tab;
}

}  // namespace zk
