#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "zk/noise.hpp"
#include "zk/operators.hpp"

namespace zk {

/// Time-dependent source in coefficient form; an empty function means f = 0.
using Forcing = std::function<Vec(double)>;

struct SolverConfig {
    double dt = 1e-3;
    double T = 1.0;
    double epsilon = 0.0;
    double c = 0.0;
    Forcing forcing;
    bool nonlinearity_on = true;
    int record_every = 1;
    // fine Brownian steps per time step; the stream is sampled at dt / substeps
    int substeps = 1;

    void validate() const;
    int steps() const;
    Vec forcing_at(double t, int n) const;
};

/// Snapshots of one trajectory plus what is needed to replay its noise.
struct SamplePath {
    std::vector<double> times;
    std::vector<CoeffField> fields;
    std::vector<int> steps;  // step index of each snapshot
    NoiseStream noise;
    SolverConfig config;
    bool ok = true;
    std::string failure;

    double final_time() const { return times.empty() ? 0.0 : times.back(); }
};

/// Implicit part of the scheme, factorised once per (dt, epsilon, c):
///   (I + dt (A + epsilon L)) u_new = u + dt (-B(u) + f(t)) + sigma(u) dW.
/// A and L are block diagonal in the transverse index, so this is one small
/// LU per block. Immutable after construction; shareable across threads.
class Stepper {
public:
    Stepper(const GalerkinOperators& ops, const SolverConfig& cfg);

    /// One step on raw coefficients. Throws NumericalError on a non-finite state.
    Vec advance(const Vec& u, double t, const NoiseModel& model, const Vec& dW) const;
    Vec solve_implicit(const Vec& rhs) const;

    const GalerkinOperators& ops() const { return *ops_; }
    const SolverConfig& config() const { return cfg_; }

private:
    const GalerkinOperators* ops_;
    SolverConfig cfg_;
    std::vector<Eigen::PartialPivLU<Mat>> lu_;
};

CoeffField step(const CoeffField& state, double t, const SolverConfig& cfg, const GalerkinOperators& ops,
                const NoiseModel& model, const WienerIncrement& inc);

/// Blow-up threshold used by the path solvers.
constexpr double kBlowupFactor = 1e6;

SamplePath solve_path(const CoeffField& u0, const Stepper& stepper, const NoiseModel& model, std::uint64_t seed);
SamplePath solve_path(const CoeffField& u0, const SolverConfig& cfg, const GalerkinOperators& ops,
                      const NoiseModel& model, std::uint64_t seed);

/// dR + (Laplacian R_x + epsilon L R) dt = g dt + h dW, with c = 0 and the
/// u-independent additive noise h (a model with zero multiplicative gains).
SamplePath solve_linearized(const CoeffField& R0, const Forcing& g, const NoiseModel& h, const SolverConfig& cfg,
                            const GalerkinOperators& ops, std::uint64_t seed);

/// Two trajectories driven by the same Brownian path.
std::pair<SamplePath, SamplePath> solve_pair(const CoeffField& u0, const CoeffField& v0, const SolverConfig& cfg,
                                             const GalerkinOperators& ops, const NoiseModel& model,
                                             std::uint64_t seed);

}  // namespace zk
