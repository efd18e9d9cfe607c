#include "zk/integrator.hpp"

#include <cmath>
#include <sstream>

#include "zk/errors.hpp"

namespace zk {

void SolverConfig::validate() const
{
    require(std::isfinite(dt) && dt > 0.0, "solver.dt must be positive");
    require(std::isfinite(T) && T > 0.0, "solver.T must be positive");
    require(dt <= T * (1.0 + 1e-12), "solver.dt must not exceed solver.T");
    require(std::isfinite(epsilon) && epsilon >= 0.0, "solver.epsilon must be >= 0");
    require(std::isfinite(c), "solver.c must be finite");
    require(record_every >= 1, "solver.record_every must be >= 1");
    require(substeps >= 1, "solver.substeps must be >= 1");
}

int SolverConfig::steps() const
{
    return static_cast<int>(std::llround(T / dt));
}

Vec SolverConfig::forcing_at(double t, int n) const
{
    if (!forcing) return Vec::Zero(n);
    Vec f = forcing(t);
    require(f.size() == n, "forcing has the wrong number of coefficients");
    return f;
}

Stepper::Stepper(const GalerkinOperators& ops, const SolverConfig& cfg) : ops_(&ops), cfg_(cfg)
{
    cfg_.validate();
    require(ops.c == cfg.c, "solver.c differs from the c the operators were assembled with");
    const auto& b = *ops.basis;
    const int nx = b.config.n_x;
    lu_.reserve(static_cast<size_t>(b.perp_modes()));
    for (int t = 0; t < b.perp_modes(); ++t) {
        Mat M = Mat::Identity(nx, nx) + cfg_.dt * ops.A_blocks[static_cast<size_t>(t)];
        if (cfg_.epsilon > 0.0)
            for (int a = 0; a < nx; ++a) M(a, a) += cfg_.dt * cfg_.epsilon * b.L_eigenvalues[b.index_of(a, t)];
        lu_.emplace_back(M);
        const double rc = lu_.back().rcond();
        if (!(rc > 1e-14)) {
            std::ostringstream msg;
            msg << "implicit matrix is singular to working precision (block " << t << ", rcond " << rc
                << ", dt " << cfg_.dt << ", epsilon " << cfg_.epsilon << ", c " << cfg_.c << ")";
            throw NumericalError(msg.str());
        }
    }
}

Vec Stepper::solve_implicit(const Vec& rhs) const
{
    const auto& b = *ops_->basis;
    Mat t = to_tensor(b, rhs);
    for (int k = 0; k < t.cols(); ++k) t.col(k) = lu_[static_cast<size_t>(k)].solve(t.col(k));
    return from_tensor(b, t);
}

Vec Stepper::advance(const Vec& u, double t, const NoiseModel& model, const Vec& dW) const
{
    const int n = static_cast<int>(u.size());
    Vec rhs = u;
    if (cfg_.forcing) rhs += cfg_.dt * cfg_.forcing_at(t, n);
    if (cfg_.nonlinearity_on) rhs -= cfg_.dt * apply_B_raw(*ops_, u);
    if (!model.is_zero()) rhs += apply_sigma_raw(model, u, dW);
    Vec out = solve_implicit(rhs);
    if (!out.allFinite()) {
        std::ostringstream msg;
        msg << "blow-up: non-finite state at t = " << t + cfg_.dt;
        throw NumericalError(msg.str());
    }
    return out;
}

CoeffField step(const CoeffField& state, double t, const SolverConfig& cfg, const GalerkinOperators& ops,
                const NoiseModel& model, const WienerIncrement& inc)
{
    check_field(*ops.basis, state);
    require(std::abs(inc.dt - cfg.dt) <= 1e-12 * cfg.dt, "increment dt differs from solver dt");
    require(inc.dW.size() == model.K, "increment length differs from noise.K");
    require(model.basis_id == state.basis_id, "noise model and field live in different bases");
    const Stepper stepper(ops, cfg);
    return {stepper.advance(state.coeffs, t, model, inc.dW), state.basis_id};
}

namespace {

void record(SamplePath& p, int m, double t, const Vec& u, std::uint64_t id)
{
    p.steps.push_back(m);
    p.times.push_back(t);
    p.fields.push_back({u, id});
}

}  // namespace

SamplePath solve_path(const CoeffField& u0, const Stepper& stepper, const NoiseModel& model, std::uint64_t seed)
{
    const auto& ops = stepper.ops();
    const auto& cfg = stepper.config();
    check_field(*ops.basis, u0);
    require(model.basis_id == u0.basis_id, "noise model and field live in different bases");

    SamplePath p;
    p.config = cfg;
    p.noise = {seed, model.K, cfg.dt / cfg.substeps};
    const int N = cfg.steps();
    const std::uint64_t id = u0.basis_id;
    const double limit = kBlowupFactor * std::max(1.0, u0.coeffs.norm());
    const bool noisy = !model.is_zero();

    Vec u = u0.coeffs;
    record(p, 0, 0.0, u, id);
    Vec dW = Vec::Zero(model.K);
    for (int m = 0; m < N; ++m) {
        const double t = m * cfg.dt;
        if (noisy) dW = p.noise.increment(static_cast<std::uint64_t>(m), cfg.substeps).dW;
        try {
            u = stepper.advance(u, t, model, dW);
        } catch (const NumericalError& e) {
            p.ok = false;
            p.failure = e.what();
            return p;
        }
        const double tn = (m + 1) * cfg.dt;
        if (u.norm() > limit) {
            std::ostringstream msg;
            msg << "blow-up: |u| = " << u.norm() << " exceeds " << kBlowupFactor << " x initial scale at t = " << tn;
            p.ok = false;
            p.failure = msg.str();
            record(p, m + 1, tn, u, id);
            return p;
        }
        if ((m + 1) % cfg.record_every == 0 || m + 1 == N) record(p, m + 1, tn, u, id);
    }
    return p;
}

SamplePath solve_path(const CoeffField& u0, const SolverConfig& cfg, const GalerkinOperators& ops,
                      const NoiseModel& model, std::uint64_t seed)
{
    const Stepper stepper(ops, cfg);
    return solve_path(u0, stepper, model, seed);
}

SamplePath solve_linearized(const CoeffField& R0, const Forcing& g, const NoiseModel& h, const SolverConfig& cfg,
                            const GalerkinOperators& ops, std::uint64_t seed)
{
    require(cfg.c == 0.0 && ops.c == 0.0, "the linearized problem is posed with c = 0");
    require(h.alpha.cwiseAbs().maxCoeff() == 0.0, "linearized noise must be additive (alpha = 0)");
    SolverConfig lin = cfg;
    lin.nonlinearity_on = false;
    lin.forcing = g;
    return solve_path(R0, lin, ops, h, seed);
}

std::pair<SamplePath, SamplePath> solve_pair(const CoeffField& u0, const CoeffField& v0, const SolverConfig& cfg,
                                             const GalerkinOperators& ops, const NoiseModel& model,
                                             std::uint64_t seed)
{
    const Stepper stepper(ops, cfg);
    return {solve_path(u0, stepper, model, seed), solve_path(v0, stepper, model, seed)};
}

}  // namespace zk
