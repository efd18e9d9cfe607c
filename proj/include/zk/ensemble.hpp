#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zk/diagnostics.hpp"
#include "zk/integrator.hpp"

namespace zk {

struct SweepSpec {
    std::string parameter;  // epsilon, n or dt
    std::vector<double> values;

    bool operator==(const SweepSpec&) const = default;
};

struct EnsembleConfig {
    int M = 1;
    std::uint64_t master_seed = 0;
    int workers = 1;
    SolverConfig solver;
    std::optional<SweepSpec> sweep;

    void validate() const;
};

/// Running mean and variance (Welford), mergeable (Chan et al.).
struct Welford {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    static Welford merge(const Welford& a, const Welford& b);
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<Welford> l2sq, xi1sq, trace0;
    std::vector<int> n_blowups;      // trajectories failed at or before each time
    std::vector<double> sup_norms;   // sup_t |u| per trajectory (NaN if it failed)
    std::vector<std::string> failures;  // per trajectory, empty if fine
    int blowups = 0;
    bool failed = false;             // more than 10% of trajectories failed

    int M() const { return static_cast<int>(failures.size()); }
    std::vector<double> finite_sup_norms() const;
};

/// Trajectory i uses the seed derive_seed(master_seed, i). Results do not
/// depend on the worker count.
EnsembleStats run_ensemble(const EnsembleConfig& cfg, const GalerkinOperators& ops, const NoiseModel& model,
                           const CoeffField& u0);

/// Same, with an observer called once per finished trajectory (from a worker
/// thread; must be thread safe).
EnsembleStats run_ensemble(const EnsembleConfig& cfg, const GalerkinOperators& ops, const NoiseModel& model,
                           const CoeffField& u0, const std::function<void(int, const SamplePath&)>& observer);

/// Merge statistics of two ensembles on the same time grid.
EnsembleStats merge(const EnsembleStats& a, const EnsembleStats& b);

/// Runs fn(i) for i in [0, count) on `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

/// sqrt(int_0^T |u(t) - v(t)|^2 dt), trapezoidal on the shared snapshot times.
double path_distance(const SamplePath& u, const SamplePath& v);

struct SweepTable {
    std::vector<double> epsilons;
    std::vector<std::vector<double>> distance;  // [epsilon][trajectory]
    std::vector<double> mean_distance;
};

/// Per-seed L^2(0,T; L^2) distance between the epsilon runs and the
/// epsilon = 0 run driven by the same noise. The list must be nonincreasing
/// and end with 0.
SweepTable epsilon_sweep(const EnsembleConfig& cfg, const std::vector<double>& eps_list,
                         const GalerkinOperators& ops, const NoiseModel& model, const CoeffField& u0);

}  // namespace zk
