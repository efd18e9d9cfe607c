#include "zk/reports.hpp"

#include <algorithm>
#include <cmath>

namespace zk {

Table stats_table(const EnsembleStats& s)
{
    Table t;
    t.columns = {"time", "mean_l2sq", "var_l2sq", "mean_xi1sq", "mean_trace0", "n_blowups"};
    for (size_t k = 0; k < s.times.size(); ++k)
        t.add({s.times[k], s.l2sq[k].mean, s.l2sq[k].variance(), s.xi1sq[k].mean, s.trace0[k].mean,
               static_cast<long long>(s.n_blowups[k])});
    return t;
}

Table path_table(const SamplePath& p, const SpectralBasis& b)
{
    Table t;
    t.columns = {"step", "time", "l2_norm", "xi1_norm", "trace_ux0_norm", "trace_ux1_norm"};
    for (size_t k = 0; k < p.fields.size(); ++k) {
        const CoeffField& u = p.fields[k];
        t.add({static_cast<long long>(p.steps[k]), p.times[k], u.coeffs.norm(), std::sqrt(xi1_squared(b, u.coeffs)),
               eval_trace(b, u, Trace::ux_at_0).norm, eval_trace(b, u, Trace::ux_at_1).norm});
    }
    return t;
}

Table epsilon_sweep_table(const SweepTable& sw)
{
    Table t;
    t.columns = {"epsilon", "mean_distance", "min_distance", "max_distance", "n_finite"};
    for (size_t e = 0; e < sw.epsilons.size(); ++e) {
        double lo = INFINITY, hi = -INFINITY;
        long long n = 0;
        for (double d : sw.distance[e])
            if (std::isfinite(d)) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
                ++n;
            }
        if (n == 0) lo = hi = NAN;
        t.add({sw.epsilons[e], sw.mean_distance[e], lo, hi, n});
    }
    return t;
}

}  // namespace zk
