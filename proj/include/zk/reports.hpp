#pragma once

#include "zk/ensemble.hpp"
#include "zk/io.hpp"

namespace zk {

/// time, mean_l2sq, var_l2sq, mean_xi1sq, mean_trace0, n_blowups
Table stats_table(const EnsembleStats& stats);

/// step, time, l2_norm, xi1_norm, trace_ux0_norm, trace_ux1_norm
Table path_table(const SamplePath& path, const SpectralBasis& basis);

/// epsilon, mean_distance, min_distance, max_distance, n_finite
Table epsilon_sweep_table(const SweepTable& sweep);

}  // namespace zk
