#pragma once

#include <string>
#include <vector>

namespace zk {

/// Nonnegative processes X, Y, Z, M sampled on a common grid over [0, tau].
struct PathProcess {
    std::vector<double> times;
    std::vector<double> X, Y, Z, M;

    void validate() const;
};

struct GronwallBound {
    std::vector<double> bound;   // (u(0) + int_0^t b) exp(int_0^t a)
    bool hypothesis_holds = true;  // u_{i+1} - u_i <= int (a u + b) on every cell
    bool dominated = true;         // u <= bound everywhere
};

GronwallBound deterministic_gronwall(const std::vector<double>& times, const std::vector<double>& u,
                                     const std::vector<double>& a, const std::vector<double>& b);

enum class GronwallVariant { full, weakened };

struct GronwallReport {
    double C0 = 0.0;
    double kappa = 0.0;  // int_0^tau M (largest over the ensemble)
    std::vector<double> stopping_times;
    int N = 0;
    int N_cap = 0;       // ceil(2 C0 kappa + 1)
    double C = 0.0;      // constant of the full conclusion
    double conclusion_lhs = 0.0;
    double conclusion_rhs = 0.0;
    int windows = 0;
    int violations = 0;
    bool hypothesis_failure = false;
    bool pass = false;
};

/// Greedy partition: tau_j is the first grid time with
/// int_{tau_{j-1}}^{tau_j} M >= 1 / (2 C0), the last one capped at tau.
/// Throws NumericalError if N exceeds ceil(2 C0 kappa + 1).
GronwallReport build_stopping_times(const std::vector<double>& times, const std::vector<double>& M, double C0);

/// Constant C(C0, N) in E(sup X + int Y) <= C E(X(0) + int Z), obtained by
/// chaining the hypothesis over N cells with int M <= 1/(2 C0) each.
double gronwall_constant(double C0, int N);

/// Checks
///   E(sup_[a,b] X + int_a^b Y) <= C0 E(X(a) + int_a^b (M X + Z))
/// on all dyadic grid windows plus a fixed pseudo-random family, then the
/// conclusion. More than 5% violated windows is reported as a hypothesis
/// failure. The weakened variant requires X(0) = 0 and Z = 0 and checks
/// E sup X and E int Y against 1e-8.
GronwallReport verify_stochastic_gronwall(const std::vector<PathProcess>& ensemble, double C0,
                                          GronwallVariant variant);

std::string to_string(GronwallVariant v);
GronwallVariant gronwall_variant_from_string(const std::string& s);

}  // namespace zk
