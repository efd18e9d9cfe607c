#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zk/basis.hpp"
#include "zk/rng.hpp"

namespace zk {

/// Diagonal affine noise on a Galerkin basis:
///   sigma(u) e_k = (alpha_k <u, phi_m(k)> + beta_k) phi_m(k),  k = 1..K.
/// Channels map to distinct basis modes.
struct NoiseModel {
    int K = 0;
    Vec alpha;                  // multiplicative gains
    Vec beta;                   // additive gains
    std::vector<int> mode_map;  // channel -> basis mode index
    Vec mode_lambda;            // L-eigenvalue of each mapped mode
    double declared_cB = 0.0;
    double declared_cU = 0.0;
    std::uint64_t basis_id = 0;

    bool is_zero() const;
};

/// Smallest constants certifying the growth and Lipschitz bounds of a model:
///   cU^2 = sum alpha^2,  cB^2 = sum (alpha^2 + beta^2) max(1, lambda).
double certified_cU(const Vec& alpha);
double certified_cB(const Vec& alpha, const Vec& beta, const Vec& mode_lambda);

/// Builds and validates a model. Empty `modes` maps channel k to mode k.
/// Negative declared constants mean "use the certified value".
NoiseModel make_noise_model(const SpectralBasis& basis, const Vec& alpha, const Vec& beta,
                            std::vector<int> modes = {}, double declared_cB = -1.0, double declared_cU = -1.0);

/// No noise at all (K = 1, zero gains), for deterministic runs.
NoiseModel zero_noise(const SpectralBasis& basis);

void validate(const NoiseModel& model);

/// Gain rules: "geometric:r" gives r^k for k = 1..K, "constant:v" gives v,
/// "zero" gives 0.
Vec expand_gain_rule(const std::string& rule, int K);

struct WienerIncrement {
    Vec dW;
    double dt = 0.0;
};

/// K independent N(0, dt) draws from the stream.
WienerIncrement sample_increment(CounterRng& rng, int K, double dt);

/// Replayable Brownian path for one trajectory. Step m of size dt is the sum
/// of `substeps` fine increments of size dt / substeps, so a run at dt and a
/// run at dt / 2 (substeps halved) see the same Brownian path.
struct NoiseStream {
    std::uint64_t seed = 0;
    int K = 1;
    double fine_dt = 0.0;

    WienerIncrement increment(std::uint64_t step, int substeps) const;
};

/// Coefficient vector of sigma(u) dW.
CoeffField apply_sigma(const NoiseModel& model, const CoeffField& u, const WienerIncrement& inc);
Vec apply_sigma_raw(const NoiseModel& model, const Vec& u, const Vec& dW);

/// Per-channel amplitudes g_k(u) = alpha_k u_m(k) + beta_k.
Vec channel_amplitudes(const NoiseModel& model, const Vec& u);

enum class HsTarget { L2, Xi1 };

double hs_norm(const NoiseModel& model, const CoeffField& u, HsTarget target);
double hs_norm_raw(const NoiseModel& model, const Vec& u, HsTarget target);
/// HS norm of sigma(u) in the weighted space L^2((1+x) dM), squared.
double hs_weighted_squared(const NoiseModel& model, const Vec& u, const Mat& weight_matrix);

/// Norm of the space U_0: sqrt(sum a_k^2 / k^2), k 1-based.
double u0_norm(const Vec& v);

}  // namespace zk
