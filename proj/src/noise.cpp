#include "zk/noise.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "zk/errors.hpp"

namespace zk {

bool NoiseModel::is_zero() const
{
    return alpha.cwiseAbs().maxCoeff() == 0.0 && beta.cwiseAbs().maxCoeff() == 0.0;
}

double certified_cU(const Vec& alpha) { return std::sqrt(alpha.squaredNorm()); }

double certified_cB(const Vec& alpha, const Vec& beta, const Vec& mode_lambda)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k)
        s += (alpha[k] * alpha[k] + beta[k] * beta[k]) * std::max(1.0, mode_lambda[k]);
    return std::sqrt(s);
}

void validate(const NoiseModel& m)
{
    require(m.K >= 1, "noise.K must be >= 1");
    require(m.alpha.size() == m.K && m.beta.size() == m.K, "noise gains must have K entries");
    require(static_cast<int>(m.mode_map.size()) == m.K, "noise mode map must have K entries");
    require(m.alpha.allFinite() && m.beta.allFinite(), "noise gains must be finite");
    // small relative slack: the declared constants are often the certified ones echoed through text
    const double slack = 1.0 + 1e-12;
    require(certified_cU(m.alpha) <= m.declared_cU * slack, "noise: sum alpha_k^2 exceeds declared cU^2");
    require(certified_cB(m.alpha, m.beta, m.mode_lambda) <= m.declared_cB * slack,
            "noise: sum (alpha_k^2 + beta_k^2) max(1, lambda) exceeds declared cB^2");
}

NoiseModel make_noise_model(const SpectralBasis& basis, const Vec& alpha, const Vec& beta, std::vector<int> modes,
                            double declared_cB, double declared_cU)
{
    NoiseModel m;
    m.K = static_cast<int>(alpha.size());
    require(m.K >= 1, "noise.K must be >= 1");
    require(beta.size() == alpha.size(), "noise.alpha and noise.beta must have the same length");
    require(m.K <= basis.size(), "noise.K (" + std::to_string(m.K) + ") exceeds basis size " + std::to_string(basis.size()));
    if (modes.empty()) {
        modes.resize(static_cast<size_t>(m.K));
        for (int k = 0; k < m.K; ++k) modes[static_cast<size_t>(k)] = k;
    }
    require(static_cast<int>(modes.size()) == m.K, "noise.modes must have K entries");
    std::set<int> seen;
    for (int idx : modes) {
        require(idx >= 0 && idx < basis.size(), "noise.modes entry " + std::to_string(idx) + " outside the basis");
        require(seen.insert(idx).second, "noise.modes entries must be distinct");
    }
    m.alpha = alpha;
    m.beta = beta;
    m.mode_map = std::move(modes);
    m.mode_lambda.resize(m.K);
    for (int k = 0; k < m.K; ++k) m.mode_lambda[k] = basis.L_eigenvalues[m.mode_map[static_cast<size_t>(k)]];
    m.declared_cU = declared_cU < 0.0 ? certified_cU(alpha) : declared_cU;
    m.declared_cB = declared_cB < 0.0 ? certified_cB(alpha, beta, m.mode_lambda) : declared_cB;
    m.basis_id = basis.id;
    validate(m);
    return m;
}

NoiseModel zero_noise(const SpectralBasis& basis)
{
    return make_noise_model(basis, Vec::Zero(1), Vec::Zero(1));
}

Vec expand_gain_rule(const std::string& rule, int K)
{
    require(K >= 1, "noise.K must be >= 1");
    if (rule == "zero") return Vec::Zero(K);
    const auto colon = rule.find(':');
    require(colon != std::string::npos, "gain rule '" + rule + "' must be 'geometric:r', 'constant:v' or 'zero'");
    const std::string kind = rule.substr(0, colon);
    double v = 0.0;
    std::istringstream in(rule.substr(colon + 1));
    in >> v;
    require(!in.fail() && in.eof() && std::isfinite(v), "gain rule '" + rule + "' has a bad number");
    Vec out(K);
    if (kind == "geometric") {
        for (int k = 0; k < K; ++k) out[k] = std::pow(v, k + 1);
    } else if (kind == "constant") {
        out.setConstant(v);
    } else {
        throw ValidationError("unknown gain rule kind '" + kind + "'");
    }
    return out;
}

WienerIncrement sample_increment(CounterRng& rng, int K, double dt)
{
    require(dt > 0.0 && std::isfinite(dt), "increment dt must be positive");
    require(K >= 1, "increment needs K >= 1");
    WienerIncrement inc;
    inc.dt = dt;
    inc.dW.resize(K);
    const double s = std::sqrt(dt);
    for (int k = 0; k < K; ++k) inc.dW[k] = s * rng.normal();
    return inc;
}

WienerIncrement NoiseStream::increment(std::uint64_t step, int substeps) const
{
    require(substeps >= 1, "substeps must be >= 1");
    require(fine_dt > 0.0, "noise stream has no step size");
    WienerIncrement inc;
    inc.dt = fine_dt * substeps;
    inc.dW = Vec::Zero(K);
    const double s = std::sqrt(fine_dt);
    const std::uint64_t first = step * static_cast<std::uint64_t>(substeps);
    for (int j = 0; j < substeps; ++j)
        for (int k = 0; k < K; ++k) inc.dW[k] += s * keyed_normal(seed, first + static_cast<std::uint64_t>(j), static_cast<std::uint32_t>(k));
    return inc;
}

Vec channel_amplitudes(const NoiseModel& m, const Vec& u)
{
    Vec g(m.K);
    for (int k = 0; k < m.K; ++k) g[k] = m.alpha[k] * u[m.mode_map[static_cast<size_t>(k)]] + m.beta[k];
    return g;
}

Vec apply_sigma_raw(const NoiseModel& m, const Vec& u, const Vec& dW)
{
    Vec out = Vec::Zero(u.size());
    for (int k = 0; k < m.K; ++k) {
        const int i = m.mode_map[static_cast<size_t>(k)];
        out[i] += (m.alpha[k] * u[i] + m.beta[k]) * dW[k];
    }
    return out;
}

CoeffField apply_sigma(const NoiseModel& m, const CoeffField& u, const WienerIncrement& inc)
{
    require(u.basis_id == m.basis_id, "noise model and field live in different bases");
    require(inc.dW.size() == m.K, "increment length differs from noise.K");
    return {apply_sigma_raw(m, u.coeffs, inc.dW), u.basis_id};
}

double hs_norm_raw(const NoiseModel& m, const Vec& u, HsTarget target)
{
    const Vec g = channel_amplitudes(m, u);
    double s = 0.0;
    for (int k = 0; k < m.K; ++k) s += g[k] * g[k] * (target == HsTarget::Xi1 ? m.mode_lambda[k] : 1.0);
    return std::sqrt(s);
}

double hs_norm(const NoiseModel& m, const CoeffField& u, HsTarget target)
{
    require(u.basis_id == m.basis_id, "noise model and field live in different bases");
    return hs_norm_raw(m, u.coeffs, target);
}

double hs_weighted_squared(const NoiseModel& m, const Vec& u, const Mat& weight_matrix)
{
    const Vec g = channel_amplitudes(m, u);
    double s = 0.0;
    for (int k = 0; k < m.K; ++k) {
        const int i = m.mode_map[static_cast<size_t>(k)];
        s += g[k] * g[k] * weight_matrix(i, i);
    }
    return s;
}

double u0_norm(const Vec& v)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double kk = static_cast<double>(k + 1);
        s += v[k] * v[k] / (kk * kk);
    }
    return std::sqrt(s);
}

}  // namespace zk
