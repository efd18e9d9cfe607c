#include "zk/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "zk/errors.hpp"

namespace zk {

using nlohmann::json;

namespace {

// Reads keys of one JSON object, remembering which were used so the rest can
// be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path, std::vector<std::string>& unknown) : path_(std::move(path)), unknown_(unknown)
    {
        if (!j.is_null() && !j.is_object()) throw ValidationError(name("") + ": must be an object");
        if (j.is_object()) obj_ = j;  // callers often pass a temporary
    }
    ~Section()
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!used_.count(it.key())) unknown_.push_back(name(it.key()));
    }

    const json* get(const std::string& key)
    {
        used_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    template <class T>
    void read(const std::string& key, T& out)
    {
        const json* v = get(key);
        if (!v) return;
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v->is_number()) throw ValidationError("");
            } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
                if (!v->is_number_integer()) throw ValidationError("");
                if constexpr (std::is_same_v<T, std::uint64_t>)
                    if (v->is_number_integer() && !v->is_number_unsigned()) throw ValidationError("");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v->is_boolean()) throw ValidationError("");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v->is_string()) throw ValidationError("");
            }
            out = v->get<T>();
        } catch (const std::exception&) {
            throw ValidationError(name(key) + ": wrong type (expected " + type_name<T>() + ")");
        }
    }

    std::string name(const std::string& key) const
    {
        if (key.empty()) return path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    template <class T>
    static std::string type_name()
    {
        if constexpr (std::is_same_v<T, double>) return "number";
        if constexpr (std::is_same_v<T, int>) return "integer";
        if constexpr (std::is_same_v<T, std::uint64_t>) return "unsigned integer";
        if constexpr (std::is_same_v<T, bool>) return "boolean";
        if constexpr (std::is_same_v<T, std::string>) return "string";
        return "array";
    }

    json obj_ = json::object();
    std::string path_;
    std::vector<std::string>& unknown_;
    std::set<std::string> used_;
};

std::vector<double> read_numbers(const json& v, const std::string& field)
{
    if (!v.is_array()) throw ValidationError(field + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError(field + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

GainSpec read_gain(const json* v, const std::string& field, GainSpec fallback)
{
    if (!v) return fallback;
    GainSpec g;
    if (v->is_string()) {
        g.rule = v->get<std::string>();
        expand_gain_rule(g.rule, 1);  // syntax check
    } else {
        g.values = read_numbers(*v, field);
        require(!g.values.empty(), field + ": explicit gain list must be nonempty");
    }
    return g;
}

json gain_json(const GainSpec& g)
{
    if (!g.rule.empty()) return g.rule;
    return g.values;
}

template <class F>
void with_field(const std::string& field, F&& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(field, 0) == 0) throw;
        throw ValidationError(field + ": " + msg);
    }
}

}  // namespace

int RunConfig::basis_size() const
{
    int per = domain.n_perp;
    if (domain.d == 2) per *= domain.n_perp;
    return domain.n_x * per;
}

int RunConfig::noise_K() const
{
    return noise.K > 0 ? noise.K : std::max(1, basis_size() / 4);
}

void RunConfig::validate() const
{
    domain.validate();
    const int n = basis_size();
    const auto& s = solver;
    require(std::isfinite(s.dt) && s.dt > 0.0, "solver.dt: must be > 0");
    require(std::isfinite(s.T) && s.T > 0.0, "solver.T: must be > 0");
    require(s.dt <= s.T, "solver.dt: must be <= solver.T");
    const double ratio = s.T / s.dt;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "solver.dt: must divide solver.T (within 1e-9 relative)");
    require(std::isfinite(s.epsilon) && s.epsilon >= 0.0, "solver.epsilon: must be >= 0");
    require(std::isfinite(s.c), "solver.c: must be finite");
    require(s.record_every >= 1, "solver.record_every: must be >= 1");
    require(s.substeps >= 1, "solver.substeps: must be >= 1");
    require(static_cast<int>(s.forcing.coeffs.size()) <= n, "solver.forcing.coeffs: more entries than basis modes");
    require(std::isfinite(s.forcing.omega), "solver.forcing.omega: must be finite");

    require(initial.type == "modes" || initial.type == "bump", "initial.type: must be 'modes' or 'bump'");
    require(static_cast<int>(initial.coeffs.size()) <= n, "initial.coeffs: more entries than basis modes");
    require(initial.width > 0.0, "initial.width: must be > 0");

    const int K = noise_K();
    require(noise.K >= 0, "noise.K: must be >= 1 (or 0 for the default n/4)");
    require(K <= n, "noise.K: must not exceed the basis size " + std::to_string(n));
    for (const auto* g : {&noise.alpha, &noise.beta}) {
        const std::string field = g == &noise.alpha ? "noise.alpha" : "noise.beta";
        if (g->rule.empty())
            require(static_cast<int>(g->values.size()) == K, field + ": explicit list must have K = " + std::to_string(K) + " entries");
        else
            with_field(field, [&] { expand_gain_rule(g->rule, K); });
    }
    require(noise.modes.empty() || static_cast<int>(noise.modes.size()) == K, "noise.modes: must have K entries");
    std::set<int> seen;
    for (int m : noise.modes) {
        require(m >= 0 && m < n, "noise.modes: entry " + std::to_string(m) + " outside the basis");
        require(seen.insert(m).second, "noise.modes: entries must be distinct");
    }
    require(!noise.cB || *noise.cB >= 0.0, "noise.cB: must be >= 0");
    require(!noise.cU || *noise.cU >= 0.0, "noise.cU: must be >= 0");

    require(ensemble.M >= 1, "ensemble.M: must be >= 1");
    require(ensemble.workers >= 1, "ensemble.workers: must be >= 1");
    if (ensemble.sweep) {
        const auto& p = ensemble.sweep->parameter;
        require(p == "epsilon" || p == "n" || p == "dt", "ensemble.sweep.parameter: must be epsilon, n or dt");
        require(!ensemble.sweep->values.empty(), "ensemble.sweep.values: must be nonempty");
    }
    require(!output.directory.empty(), "output.directory: must be nonempty");
    require(output.snapshot_every >= 0, "output.snapshot_every: must be >= 0");
}

RunConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    require(root.is_object(), "config must be a JSON object");

    RunConfig cfg;
    std::vector<std::string> unknown;
    {
        Section top(root, "", unknown);
        {
            Section s(top.get("domain") ? *top.get("domain") : json(), "domain", unknown);
            s.read("d", cfg.domain.d);
            s.read("n_x", cfg.domain.n_x);
            s.read("n_perp", cfg.domain.n_perp);
            s.read("quad_x", cfg.domain.quad_x);
            s.read("quad_perp", cfg.domain.quad_perp);
            std::string bc = to_string(cfg.domain.transverse_bc);
            s.read("transverse_bc", bc);
            with_field("domain.transverse_bc", [&] { cfg.domain.transverse_bc = transverse_bc_from_string(bc); });
        }
        {
            Section s(top.get("solver") ? *top.get("solver") : json(), "solver", unknown);
            s.read("dt", cfg.solver.dt);
            s.read("T", cfg.solver.T);
            s.read("epsilon", cfg.solver.epsilon);
            s.read("c", cfg.solver.c);
            s.read("nonlinearity", cfg.solver.nonlinearity);
            s.read("record_every", cfg.solver.record_every);
            s.read("substeps", cfg.solver.substeps);
            Section f(s.get("forcing") ? *s.get("forcing") : json(), "solver.forcing", unknown);
            if (const json* v = f.get("coeffs")) cfg.solver.forcing.coeffs = read_numbers(*v, "solver.forcing.coeffs");
            f.read("omega", cfg.solver.forcing.omega);
        }
        {
            Section s(top.get("initial") ? *top.get("initial") : json(), "initial", unknown);
            s.read("type", cfg.initial.type);
            if (const json* v = s.get("coeffs")) cfg.initial.coeffs = read_numbers(*v, "initial.coeffs");
            s.read("amplitude", cfg.initial.amplitude);
            s.read("center", cfg.initial.center);
            s.read("width", cfg.initial.width);
        }
        {
            Section s(top.get("noise") ? *top.get("noise") : json(), "noise", unknown);
            s.read("K", cfg.noise.K);
            with_field("noise.alpha", [&] { cfg.noise.alpha = read_gain(s.get("alpha"), "noise.alpha", cfg.noise.alpha); });
            with_field("noise.beta", [&] { cfg.noise.beta = read_gain(s.get("beta"), "noise.beta", cfg.noise.beta); });
            s.read("seed", cfg.noise.seed);
            if (const json* v = s.get("modes")) {
                for (double m : read_numbers(*v, "noise.modes")) {
                    require(m == std::floor(m), "noise.modes: entries must be integers");
                    cfg.noise.modes.push_back(static_cast<int>(m));
                }
            }
            double tmp = 0.0;
            if (s.get("cB")) {
                s.read("cB", tmp);
                cfg.noise.cB = tmp;
            }
            if (s.get("cU")) {
                s.read("cU", tmp);
                cfg.noise.cU = tmp;
            }
        }
        {
            Section s(top.get("ensemble") ? *top.get("ensemble") : json(), "ensemble", unknown);
            s.read("M", cfg.ensemble.M);
            s.read("master_seed", cfg.ensemble.master_seed);
            s.read("workers", cfg.ensemble.workers);
            if (const json* v = s.get("sweep")) {
                Section w(*v, "ensemble.sweep", unknown);
                SweepSpec sw;
                w.read("parameter", sw.parameter);
                if (const json* vals = w.get("values")) sw.values = read_numbers(*vals, "ensemble.sweep.values");
                cfg.ensemble.sweep = sw;
            }
        }
        {
            Section s(top.get("output") ? *top.get("output") : json(), "output", unknown);
            s.read("directory", cfg.output.directory);
            s.read("snapshot_every", cfg.output.snapshot_every);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config key(s):";
        for (const auto& k : unknown) msg += " " + k;
        throw ValidationError(msg);
    }
    cfg.validate();
    cfg.domain = cfg.domain.resolved();
    cfg.noise.K = cfg.noise_K();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string print_config(const RunConfig& c)
{
    json j;
    j["domain"] = {{"d", c.domain.d},
                   {"n_x", c.domain.n_x},
                   {"n_perp", c.domain.n_perp},
                   {"quad_x", c.domain.resolved().quad_x},
                   {"quad_perp", c.domain.resolved().quad_perp},
                   {"transverse_bc", to_string(c.domain.transverse_bc)}};
    j["solver"] = {{"dt", c.solver.dt},
                   {"T", c.solver.T},
                   {"epsilon", c.solver.epsilon},
                   {"c", c.solver.c},
                   {"nonlinearity", c.solver.nonlinearity},
                   {"record_every", c.solver.record_every},
                   {"substeps", c.solver.substeps},
                   {"forcing", {{"coeffs", c.solver.forcing.coeffs}, {"omega", c.solver.forcing.omega}}}};
    j["initial"] = {{"type", c.initial.type},
                    {"coeffs", c.initial.coeffs},
                    {"amplitude", c.initial.amplitude},
                    {"center", c.initial.center},
                    {"width", c.initial.width}};
    j["noise"] = {{"K", c.noise_K()},
                  {"alpha", gain_json(c.noise.alpha)},
                  {"beta", gain_json(c.noise.beta)},
                  {"seed", c.noise.seed},
                  {"modes", c.noise.modes},
                  {"cB", c.noise.cB ? json(*c.noise.cB) : json(nullptr)},
                  {"cU", c.noise.cU ? json(*c.noise.cU) : json(nullptr)}};
    j["ensemble"] = {{"M", c.ensemble.M},
                     {"master_seed", c.ensemble.master_seed},
                     {"workers", c.ensemble.workers},
                     {"sweep", c.ensemble.sweep ? json{{"parameter", c.ensemble.sweep->parameter},
                                                       {"values", c.ensemble.sweep->values}}
                                                : json(nullptr)}};
    j["output"] = {{"directory", c.output.directory}, {"snapshot_every", c.output.snapshot_every}};
    return j.dump(2) + "\n";
}

std::string config_help()
{
    return R"(Config keys (JSON), with defaults:
  domain.d              1        transverse dimensions (1 or 2)
  domain.n_x            8        x-modes
  domain.n_perp         8        transverse modes per direction
  domain.quad_x         4n_x+16  x quadrature nodes (>= 2 n_x)
  domain.quad_perp      4n_perp+16  transverse nodes per direction (>= 2 n_perp)
  domain.transverse_bc  "dirichlet"  or "periodic"
  solver.dt             0.001    time step (must divide T)
  solver.T              1        horizon
  solver.epsilon        0        fourth-order regularisation
  solver.c              0        linear advection speed
  solver.nonlinearity   true     include u u_x
  solver.record_every   1        snapshot stride in steps
  solver.substeps       1        fine Brownian steps per step
  solver.forcing.coeffs []       f = cos(omega t) sum coeffs[i] phi_i
  solver.forcing.omega  0
  initial.type          "modes"  or "bump"
  initial.coeffs        [0.5]    mode coefficients ("modes")
  initial.amplitude     1        bump height ("bump")
  initial.center        0.5      bump centre in x
  initial.width         0.15     bump width in x
  noise.K               n/4      noise channels
  noise.alpha           "geometric:0.5"  multiplicative gains: rule or list
  noise.beta            "geometric:0.5"  additive gains: rule or list
  noise.seed            0        stream seed for simulate
  noise.modes           []       channel -> mode index (default k -> k)
  noise.cB, noise.cU    null     declared constants (null = certified)
  ensemble.M            100      trajectories
  ensemble.master_seed  0
  ensemble.workers      1        threads
  ensemble.sweep        null     {"parameter": epsilon|n|dt, "values": [...]}
  output.directory      "out"
  output.snapshot_every 100      steps between field files (0 = first and last)
Gain rules: "geometric:r" (r^k), "constant:v", "zero".
)";
}

SolverConfig make_solver_config(const RunConfig& cfg)
{
    SolverConfig s;
    s.dt = cfg.solver.dt;
    s.T = cfg.solver.T;
    s.epsilon = cfg.solver.epsilon;
    s.c = cfg.solver.c;
    s.nonlinearity_on = cfg.solver.nonlinearity;
    s.record_every = cfg.solver.record_every;
    s.substeps = cfg.solver.substeps;
    const auto& f = cfg.solver.forcing;
    bool any = false;
    for (double v : f.coeffs) any = any || v != 0.0;
    if (any) {
        const int n = cfg.basis_size();
        Vec base = Vec::Zero(n);
        for (size_t i = 0; i < f.coeffs.size(); ++i) base[static_cast<Eigen::Index>(i)] = f.coeffs[i];
        const double omega = f.omega;
        s.forcing = [base, omega](double t) -> Vec { return omega == 0.0 ? base : Vec(std::cos(omega * t) * base); };
    }
    return s;
}

NoiseModel make_noise(const RunConfig& cfg, const SpectralBasis& basis)
{
    const int K = cfg.noise_K();
    auto gains = [K](const GainSpec& g) {
        if (!g.rule.empty()) return expand_gain_rule(g.rule, K);
        return Vec(Eigen::Map<const Vec>(g.values.data(), static_cast<Eigen::Index>(g.values.size())));
    };
    return make_noise_model(basis, gains(cfg.noise.alpha), gains(cfg.noise.beta), cfg.noise.modes,
                            cfg.noise.cB.value_or(-1.0), cfg.noise.cU.value_or(-1.0));
}

CoeffField make_initial(const RunConfig& cfg, const SpectralBasis& basis)
{
    CoeffField u = CoeffField::zero(basis);
    if (cfg.initial.type == "modes") {
        for (size_t i = 0; i < cfg.initial.coeffs.size(); ++i) u.coeffs[static_cast<Eigen::Index>(i)] = cfg.initial.coeffs[i];
        return u;
    }
    const auto& g = basis.grid;
    Mat values(g.quad_x, g.perp_points());
    const int P1 = g.quad_perp;
    for (int i = 0; i < g.quad_x; ++i) {
        const double z = (g.x_nodes[i] - cfg.initial.center) / cfg.initial.width;
        const double fx = cfg.initial.amplitude * std::exp(-z * z) * std::sin(3.14159265358979323846 * g.x_nodes[i]);
        for (int p = 0; p < g.perp_points(); ++p) {
            double fy = std::cos(g.perp_nodes[basis.config.d == 2 ? p / P1 : p]);
            if (basis.config.d == 2) fy *= std::cos(g.perp_nodes[p % P1]);
            values(i, p) = fx * fy;
        }
    }
    return analyze(basis, values);
}

EnsembleConfig make_ensemble_config(const RunConfig& cfg)
{
    EnsembleConfig e;
    e.M = cfg.ensemble.M;
    e.master_seed = cfg.ensemble.master_seed;
    e.workers = cfg.ensemble.workers;
    e.solver = make_solver_config(cfg);
    e.sweep = cfg.ensemble.sweep;
    return e;
}

}  // namespace zk
