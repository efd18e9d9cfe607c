#include "zk/gronwall.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "zk/errors.hpp"

namespace zk {

void PathProcess::validate() const
{
    const size_t n = times.size();
    require(n >= 1, "process has no samples");
    require(X.size() == n && Y.size() == n && Z.size() == n && M.size() == n, "process columns differ in length");
    for (size_t i = 1; i < n; ++i) require(times[i] > times[i - 1], "process times must be increasing");
    for (const auto* col : {&X, &Y, &Z, &M})
        for (double v : *col) require(std::isfinite(v) && v >= 0.0, "process values must be finite and >= 0");
}

GronwallBound deterministic_gronwall(const std::vector<double>& t, const std::vector<double>& u,
                                     const std::vector<double>& a, const std::vector<double>& b)
{
    const size_t n = t.size();
    require(u.size() == n && a.size() == n && b.size() == n, "gronwall inputs must share one grid");
    require(n >= 1, "gronwall needs at least one sample");
    GronwallBound out;
    out.bound.resize(n);
    double ia = 0.0, ib = 0.0;
    out.bound[0] = u[0];
    for (size_t i = 1; i < n; ++i) {
        const double h = t[i] - t[i - 1];
        require(h > 0.0, "gronwall grid must be increasing");
        ia += 0.5 * h * (a[i] + a[i - 1]);
        ib += 0.5 * h * (b[i] + b[i - 1]);
        out.bound[i] = (u[0] + ib) * std::exp(ia);
        const double rhs = 0.5 * h * (a[i] * u[i] + b[i] + a[i - 1] * u[i - 1] + b[i - 1]);
        if (u[i] - u[i - 1] > rhs + 1e-14 * (std::abs(u[i]) + std::abs(u[i - 1]))) out.hypothesis_holds = false;
    }
    for (size_t i = 0; i < n; ++i)
        if (u[i] > out.bound[i] * (1.0 + 1e-6) + 1e-12) out.dominated = false;
    return out;
}

GronwallReport build_stopping_times(const std::vector<double>& t, const std::vector<double>& M, double C0)
{
    require(C0 > 0.0, "C0 must be positive");
    require(t.size() == M.size() && !t.empty(), "M must be sampled on the time grid");
    for (double m : M) require(std::isfinite(m) && m >= 0.0, "M must be finite and >= 0");
    GronwallReport r;
    r.C0 = C0;
    const double threshold = 1.0 / (2.0 * C0);
    double acc = 0.0;
    for (size_t i = 1; i < t.size(); ++i) {
        const double cell = 0.5 * (t[i] - t[i - 1]) * (M[i] + M[i - 1]);
        r.kappa += cell;
        acc += cell;
        if (acc >= threshold) {
            r.stopping_times.push_back(t[i]);
            acc = 0.0;
        }
    }
    if (r.stopping_times.empty() || r.stopping_times.back() < t.back()) r.stopping_times.push_back(t.back());
    r.N = static_cast<int>(r.stopping_times.size());
    r.N_cap = static_cast<int>(std::ceil(2.0 * C0 * r.kappa + 1.0));
    if (r.N > r.N_cap)
        throw NumericalError("stopping-time count " + std::to_string(r.N) + " exceeds ceil(2 C0 kappa + 1) = "
                             + std::to_string(r.N_cap));
    r.pass = true;
    return r;
}

double gronwall_constant(double C0, int N)
{
    // unit data x0 = z = 1; cell j: E sup X <= 2 C0 (b_{j-1} + z), E int Y <= C0 (b_{j-1} + z)
    double prev = 1.0, total = 0.0;
    for (int j = 1; j <= N; ++j) {
        const double b = 2.0 * C0 * (prev + 1.0);
        total += b + C0 * (prev + 1.0);
        prev = b;
    }
    return total;
}

namespace {

struct Window {
    size_t a, b;
};

std::vector<Window> windows_for(size_t n)
{
    std::set<std::pair<size_t, size_t>> pairs;
    const size_t last = n - 1;
    for (size_t parts = 1; parts <= last; parts *= 2) {
        for (size_t k = 0; k < parts; ++k) {
            const size_t a = k * last / parts, b = (k + 1) * last / parts;
            if (a < b) pairs.insert({a, b});
        }
        if (parts > last / 2) break;
    }
    std::mt19937_64 gen(0x5eedULL);
    std::uniform_int_distribution<size_t> pick(0, last);
    for (int i = 0; i < 256 && last > 0; ++i) {
        size_t a = pick(gen), b = pick(gen);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        pairs.insert({a, b});
    }
    std::vector<Window> out;
    for (const auto& [a, b] : pairs) out.push_back({a, b});
    return out;
}

}  // namespace

GronwallReport verify_stochastic_gronwall(const std::vector<PathProcess>& ens, double C0, GronwallVariant variant)
{
    require(!ens.empty(), "gronwall check needs a nonempty ensemble");
    require(C0 > 0.0, "C0 must be positive");
    const size_t n = ens.front().times.size();
    for (const auto& p : ens) {
        p.validate();
        require(p.times.size() == n, "ensemble members must share one time grid");
        for (size_t i = 0; i < n; ++i) require(p.times[i] == ens.front().times[i], "ensemble members must share one time grid");
        if (variant == GronwallVariant::weakened) {
            require(p.X.front() == 0.0, "weakened variant requires X(0) = 0 on every member");
            for (double z : p.Z) require(z == 0.0, "weakened variant requires Z = 0 on every member");
        }
    }
    const double Mn = static_cast<double>(ens.size());
    const auto& t = ens.front().times;

    GronwallReport r;
    r.C0 = C0;
    int Nmax = 1;
    for (const auto& p : ens) {
        const GronwallReport s = build_stopping_times(t, p.M, C0);
        r.kappa = std::max(r.kappa, s.kappa);
        Nmax = std::max(Nmax, s.N);
        if (s.stopping_times.size() > r.stopping_times.size()) r.stopping_times = s.stopping_times;
    }
    r.N = Nmax;
    r.N_cap = static_cast<int>(std::ceil(2.0 * C0 * r.kappa + 1.0));
    if (r.N > r.N_cap) throw NumericalError("stopping-time count exceeds ceil(2 C0 kappa + 1)");

    if (n >= 2) {
        for (const Window& w : windows_for(n)) {
            double lhs = 0.0, rhs = 0.0;
            for (const auto& p : ens) {
                double sup = 0.0, iy = 0.0, irhs = 0.0;
                for (size_t i = w.a; i <= w.b; ++i) sup = std::max(sup, p.X[i]);
                for (size_t i = w.a + 1; i <= w.b; ++i) {
                    const double h = t[i] - t[i - 1];
                    iy += 0.5 * h * (p.Y[i] + p.Y[i - 1]);
                    irhs += 0.5 * h * (p.M[i] * p.X[i] + p.Z[i] + p.M[i - 1] * p.X[i - 1] + p.Z[i - 1]);
                }
                lhs += (sup + iy) / Mn;
                rhs += C0 * (p.X[w.a] + irhs) / Mn;
            }
            ++r.windows;
            if (lhs > rhs * (1.0 + 1e-12)) ++r.violations;
        }
    }
    r.hypothesis_failure = r.windows > 0 && r.violations > 0.05 * r.windows;

    double esup = 0.0, eiy = 0.0, ex0 = 0.0, eiz = 0.0;
    for (const auto& p : ens) {
        double sup = 0.0, iy = 0.0, iz = 0.0;
        for (size_t i = 0; i < n; ++i) sup = std::max(sup, p.X[i]);
        for (size_t i = 1; i < n; ++i) {
            const double h = t[i] - t[i - 1];
            iy += 0.5 * h * (p.Y[i] + p.Y[i - 1]);
            iz += 0.5 * h * (p.Z[i] + p.Z[i - 1]);
        }
        esup += sup / Mn;
        eiy += iy / Mn;
        ex0 += p.X.front() / Mn;
        eiz += iz / Mn;
    }
    r.conclusion_lhs = esup + eiy;
    if (variant == GronwallVariant::weakened) {
        r.C = 0.0;
        r.conclusion_rhs = 0.0;
        r.pass = !r.hypothesis_failure && esup <= 1e-8 && eiy <= 1e-8;
    } else {
        r.C = gronwall_constant(C0, r.N_cap);
        r.conclusion_rhs = r.C * (ex0 + eiz);
        r.pass = !r.hypothesis_failure && r.conclusion_lhs <= r.conclusion_rhs * (1.0 + 1e-12);
    }
    return r;
}

std::string to_string(GronwallVariant v) { return v == GronwallVariant::full ? "full" : "weakened"; }

GronwallVariant gronwall_variant_from_string(const std::string& s)
{
    if (s == "full") return GronwallVariant::full;
    if (s == "weakened") return GronwallVariant::weakened;
    throw ValidationError("unknown gronwall variant '" + s + "' (expected full or weakened)");
}

}  // namespace zk
