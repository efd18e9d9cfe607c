#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zk/basis.hpp"
#include "zk/ensemble.hpp"
#include "zk/integrator.hpp"
#include "zk/noise.hpp"

namespace zk {

/// f(t) = cos(omega t) * sum_i coeffs[i] phi_i
struct ForcingSpec {
    std::vector<double> coeffs;
    double omega = 0.0;
    bool operator==(const ForcingSpec&) const = default;
};

struct SolverSpec {
    double dt = 1e-3;
    double T = 1.0;
    double epsilon = 0.0;
    double c = 0.0;
    bool nonlinearity = true;
    int record_every = 1;
    int substeps = 1;
    ForcingSpec forcing;
    bool operator==(const SolverSpec&) const = default;
};

/// "modes": u0 = sum coeffs[i] phi_i.
/// "bump":  u0 = projection of amplitude exp(-((x - center)/width)^2) sin(pi x) prod cos(y_j).
struct InitialSpec {
    std::string type = "modes";
    std::vector<double> coeffs{0.5};
    double amplitude = 1.0;
    double center = 0.5;
    double width = 0.15;
    bool operator==(const InitialSpec&) const = default;
};

/// Either a rule string ("geometric:r", "constant:v", "zero") or explicit values.
struct GainSpec {
    std::string rule;
    std::vector<double> values;
    bool operator==(const GainSpec&) const = default;
};

struct NoiseSpec {
    int K = 0;  // 0 = n / 4 (at least 1)
    GainSpec alpha{"geometric:0.5", {}};
    GainSpec beta{"geometric:0.5", {}};
    std::uint64_t seed = 0;
    std::vector<int> modes;            // empty = channel k on mode k
    std::optional<double> cB, cU;      // empty = certified values
    bool operator==(const NoiseSpec&) const = default;
};

struct EnsembleSpec {
    int M = 100;
    std::uint64_t master_seed = 0;
    int workers = 1;
    std::optional<SweepSpec> sweep;
    bool operator==(const EnsembleSpec&) const = default;
};

struct OutputSpec {
    std::string directory = "out";
    int snapshot_every = 100;  // steps between field files; 0 = initial and final only
    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    DomainConfig domain;
    SolverSpec solver;
    InitialSpec initial;
    NoiseSpec noise;
    EnsembleSpec ensemble;
    OutputSpec output;
    bool operator==(const RunConfig&) const = default;

    /// Cross-field checks; throws ValidationError naming the field.
    void validate() const;
    int basis_size() const;
    int noise_K() const;
};

/// Parses and validates; unknown keys are an error that lists all of them.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every key with its value, defaults included.
std::string print_config(const RunConfig& cfg);

/// Key reference for --help.
std::string config_help();

// Builders from a validated config.
SolverConfig make_solver_config(const RunConfig& cfg);
NoiseModel make_noise(const RunConfig& cfg, const SpectralBasis& basis);
CoeffField make_initial(const RunConfig& cfg, const SpectralBasis& basis);
EnsembleConfig make_ensemble_config(const RunConfig& cfg);

}  // namespace zk
