#pragma once

#include <string>
#include <vector>

#include "zk/config.hpp"
#include "zk/io.hpp"

namespace zk {

/// Check suites behind `zk verify`. Each returns one row per checked
/// property; a suite passes when every row does. Sizes come from the config
/// unless given explicitly.

/// Operator identities and basis properties on `fields` random fields:
/// advection orthogonality, the boundary and regularisation forms, the
/// bilinear difference identity, the weighted identity, cubic quadrature,
/// orthonormality and boundary conditions.
std::vector<CheckRow> identity_suite(const RunConfig& cfg, int fields);

/// Energy ledgers. Deterministic linear runs from the configured u0 must
/// close at second order per step; stochastic runs from u0 = 0 over M
/// trajectories must have a centred martingale column and first-order mean
/// residuals (ratio in [1.6, 2.4] per dt halving), for both the plain and the
/// weighted ledger. The horizon is min(T, 0.1).
std::vector<CheckRow> budget_suite(const RunConfig& cfg, int M);

/// E sup|u|^p for p = 2 and 6 over M trajectories: finiteness, confidence
/// width scaling (four disjoint quarters against the whole), and a bound
/// exp(c T)(|u0|^p + int|f|^p + c) with c fitted to the first quarter's
/// mean + 3 SE; the lower 95% limit on the other three quarters must stay
/// under it.
std::vector<CheckRow> moment_suite(const RunConfig& cfg, int M);

/// Same-noise pairs: identical data stay identical on `same_seeds` seeds;
/// data perturbed by 1e-3 stay under the Gronwall bound on at least 95% of
/// `seeds` seeds. d = 1, Dirichlet only.
std::vector<CheckRow> uniqueness_suite(const RunConfig& cfg, int seeds, int same_seeds = 10);

/// u_x(1) over a decreasing epsilon sequence: zero in the basis, and the
/// grid-level one-sided slope settles as epsilon decreases.
std::vector<CheckRow> trace_suite(const RunConfig& cfg);

std::vector<std::string> suite_names();
/// Dispatch by name with default sizes (M = ensemble.M, 100 fields/seeds).
std::vector<CheckRow> run_suite(const std::string& name, const RunConfig& cfg);

bool all_pass(const std::vector<CheckRow>& rows);

}  // namespace zk
