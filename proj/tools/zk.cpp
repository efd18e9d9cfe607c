// zk: command-line front end for the spectral ZK simulator.
//
// Exit codes: 0 success, 1 a verification ran and some check failed,
// 2 invalid input, 3 numerical failure, 4 file system error.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "zk/config.hpp"
#include "zk/diagnostics.hpp"
#include "zk/ensemble.hpp"
#include "zk/errors.hpp"
#include "zk/gronwall.hpp"
#include "zk/io.hpp"
#include "zk/reports.hpp"
#include "zk/verify.hpp"

namespace fs = std::filesystem;
using namespace zk;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

void add_common(CLI::App* app, Common& c, const std::string& out_help)
{
    app->add_option("--config", c.config, "JSON config file (defaults apply when omitted)");
    app->add_option("--seed", c.seed, "override the seed (noise.seed for simulate, ensemble.master_seed otherwise)");
    app->add_option("--out", c.out, out_help);
    app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "ndjson"}));
}

RunConfig load(const Common& c)
{
    return c.config.empty() ? parse_config("{}") : load_config(c.config);
}

ReportFormat format_of(const Common& c) { return c.format == "ndjson" ? ReportFormat::ndjson : ReportFormat::csv; }

std::string ext(const Common& c) { return c.format == "ndjson" ? ".ndjson" : ".csv"; }

fs::path out_dir(const Common& c, const RunConfig& cfg)
{
    const fs::path dir = c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

// report files default to a name inside output.directory
std::string out_file(const Common& c, const RunConfig& cfg, const std::string& name)
{
    if (!c.out.empty()) return c.out;
    return (out_dir(c, cfg) / name).string();
}

std::shared_ptr<const SpectralBasis> basis_of(const RunConfig& cfg)
{
    return std::make_shared<const SpectralBasis>(build_basis(cfg.domain));
}

int cmd_basis(const Common& c)
{
    const RunConfig cfg = load(c);
    const auto b = basis_of(cfg);
    const std::string path = c.out.empty() ? (out_dir(c, cfg) / "basis.zkb").string() : c.out;
    write_basis_file(path, *b);
    std::cout << "modes " << b->size() << "  lambda_1 " << format_double(b->L_eigenvalues[0]) << "  lambda_max "
              << format_double(b->L_eigenvalues[b->size() - 1]) << "  hash " << basis_hash_hex(*b) << "\n"
              << "wrote " << path << "\n";
    return 0;
}

int cmd_simulate(const Common& c)
{
    RunConfig cfg = load(c);
    if (c.seed) cfg.noise.seed = *c.seed;
    const auto b = basis_of(cfg);
    const auto ops = assemble_operators(b, cfg.solver.c);
    const SamplePath p = solve_path(make_initial(cfg, *b), make_solver_config(cfg), ops, make_noise(cfg, *b),
                                    cfg.noise.seed);
    const fs::path dir = out_dir(c, cfg);
    write_text((dir / "config.json").string(), print_config(cfg));
    emit_report(path_table(p, *b), (dir / ("path" + ext(c))).string(), format_of(c));
    const int every = cfg.output.snapshot_every;
    for (size_t i = 0; i < p.fields.size(); ++i) {
        const int s = p.steps[i];
        const bool keep = i == 0 || i + 1 == p.fields.size() || (every > 0 && s % every == 0);
        if (keep) write_field_file((dir / ("field_" + std::to_string(s) + ".zkf")).string(), *b, p.fields[i], p.times[i]);
    }
    if (!p.ok) {
        std::cerr << "zk: " << p.failure << "\n";
        return 3;
    }
    std::cout << "steps " << p.steps.back() << "  |u(T)| " << format_double(p.fields.back().coeffs.norm()) << "\n";
    return 0;
}

// One ensemble per value of an n or dt sweep; final-time statistics per row.
Table parameter_sweep(const RunConfig& base, const SweepSpec& sweep)
{
    Table t;
    t.columns = {"parameter", "value", "time", "mean_l2sq", "var_l2sq", "mean_xi1sq", "mean_trace0", "n_blowups"};
    for (double v : sweep.values) {
        RunConfig cfg = base;
        if (sweep.parameter == "n") {
            const int n = static_cast<int>(std::lround(v));
            require(n >= 1 && std::abs(v - n) < 1e-12, "ensemble.sweep.values: n must be a positive integer");
            cfg.domain.n_x = cfg.domain.n_perp = n;
            cfg.domain.quad_x = cfg.domain.quad_perp = 0;
        } else {
            cfg.solver.dt = v;
        }
        cfg.ensemble.sweep.reset();
        cfg = parse_config(print_config(cfg));  // revalidate the derived config
        const auto b = basis_of(cfg);
        const auto ops = assemble_operators(b, cfg.solver.c);
        const EnsembleStats s = run_ensemble(make_ensemble_config(cfg), ops, make_noise(cfg, *b), make_initial(cfg, *b));
        const size_t last = s.times.size() - 1;
        t.add({sweep.parameter, v, s.times[last], s.l2sq[last].mean, s.l2sq[last].variance(), s.xi1sq[last].mean,
               s.trace0[last].mean, static_cast<long long>(s.n_blowups[last])});
    }
    return t;
}

int cmd_ensemble(const Common& c)
{
    RunConfig cfg = load(c);
    if (c.seed) cfg.ensemble.master_seed = *c.seed;
    const auto b = basis_of(cfg);
    const auto ops = assemble_operators(b, cfg.solver.c);
    const NoiseModel model = make_noise(cfg, *b);
    const CoeffField u0 = make_initial(cfg, *b);
    EnsembleConfig e = make_ensemble_config(cfg);
    const EnsembleStats stats = run_ensemble(e, ops, model, u0);
    const fs::path dir = out_dir(c, cfg);
    emit_report(stats_table(stats), (dir / ("stats" + ext(c))).string(), format_of(c));
    if (cfg.ensemble.sweep) {
        const SweepSpec& sw = *cfg.ensemble.sweep;
        const Table t = sw.parameter == "epsilon" ? epsilon_sweep_table(epsilon_sweep(e, sw.values, ops, model, u0))
                                                  : parameter_sweep(cfg, sw);
        emit_report(t, (dir / ("sweep" + ext(c))).string(), format_of(c));
    }
    std::cout << "trajectories " << stats.M() << "  blow-ups " << stats.blowups << "\n";
    if (stats.failed) {
        std::cerr << "zk: more than 10% of trajectories blew up\n";
        return 3;
    }
    return 0;
}

int cmd_verify(const Common& c, const std::string& suite)
{
    RunConfig cfg = load(c);
    if (c.seed) cfg.ensemble.master_seed = *c.seed;
    const auto rows = run_suite(suite, cfg);
    emit_report(report_table(rows), out_file(c, cfg, "report" + ext(c)), format_of(c));
    int failed = 0;
    for (const auto& r : rows) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.check_id << "  " << format_double(r.value) << " (tol "
                  << format_double(r.tolerance) << ")\n";
        failed += r.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}

int cmd_gronwall(const Common& c, const std::string& input, double c0, const std::string& variant)
{
    const auto ens = read_paths_csv(input);
    require(!ens.empty(), "--input: no paths");
    const GronwallReport r = verify_stochastic_gronwall(ens, c0, gronwall_variant_from_string(variant));
    Table t;
    t.columns = {"C0", "kappa", "N", "N_cap", "C", "conclusion_lhs", "conclusion_rhs", "windows", "violations",
                 "hypothesis_failure", "pass"};
    t.add({r.C0, r.kappa, static_cast<long long>(r.N), static_cast<long long>(r.N_cap), r.C, r.conclusion_lhs,
           r.conclusion_rhs, static_cast<long long>(r.windows), static_cast<long long>(r.violations),
           r.hypothesis_failure, r.pass});
    const std::string path = c.out.empty() ? "gronwall" + ext(c) : c.out;
    emit_report(t, path, format_of(c));
    Table st;
    st.columns = {"j", "stopping_time"};
    for (size_t j = 0; j < r.stopping_times.size(); ++j) st.add({static_cast<long long>(j + 1), r.stopping_times[j]});
    const fs::path sp = fs::path(path).parent_path() / ("stopping_times" + ext(c));
    emit_report(st, sp.string(), format_of(c));
    std::cout << "N " << r.N << " (cap " << r.N_cap << ")  violations " << r.violations << "/" << r.windows
              << (r.pass ? "  pass\n" : "  fail\n");
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral Galerkin simulator and diagnostics for the stochastic ZK equation"};
    app.footer(config_help());
    app.require_subcommand(1);

    Common basis_o, sim_o, ens_o, ver_o, gr_o;
    auto* basis = app.add_subcommand("basis", "build the basis and write basis.zkb");
    add_common(basis, basis_o, "output file (default <output.directory>/basis.zkb)");
    auto* sim = app.add_subcommand("simulate", "one trajectory: path table and field snapshots");
    add_common(sim, sim_o, "output directory (default output.directory)");
    auto* ens = app.add_subcommand("ensemble", "Monte Carlo statistics, plus sweep table when configured");
    add_common(ens, ens_o, "output directory (default output.directory)");
    auto* ver = app.add_subcommand("verify", "run a check suite and write a report");
    add_common(ver, ver_o, "report file (default <output.directory>/report.csv)");
    std::string suite;
    ver->add_option("--suite", suite, "check suite")->required()->check(CLI::IsMember(suite_names()));
    auto* gr = app.add_subcommand("gronwall", "stochastic Gronwall check on sampled processes");
    add_common(gr, gr_o, "report file (default gronwall.csv)");
    std::string input, variant = "full";
    double c0 = 1.0;
    gr->add_option("--input", input, "paths.csv with path_id, time, X, Y, Z, M")->required();
    gr->add_option("--c0", c0, "hypothesis constant C0 > 0")->required();
    gr->add_option("--variant", variant, "full or weakened")->check(CLI::IsMember({"full", "weakened"}));

    for (auto* sub : {basis, sim, ens, ver, gr}) sub->footer(config_help());

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*basis) return cmd_basis(basis_o);
        if (*sim) return cmd_simulate(sim_o);
        if (*ens) return cmd_ensemble(ens_o);
        if (*ver) return cmd_verify(ver_o, suite);
        if (*gr) return cmd_gronwall(gr_o, input, c0, variant);
    } catch (const ValidationError& e) {
        std::cerr << "zk: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "zk: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "zk: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
