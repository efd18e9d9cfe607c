#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "support.hpp"
#include "zk/config.hpp"
#include "zk/errors.hpp"
#include "zk/io.hpp"

using namespace zk;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir()
{
    const fs::path p = fs::temp_directory_path() / "zk_config_io_test";
    fs::create_directories(p);
    return p;
}

std::string error_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal config echoes documented defaults")
{
    const RunConfig c = parse_config(R"({"domain": {"d": 1, "n_x": 8, "n_perp": 8}})");
    CHECK(c.solver.epsilon == 0.0);
    CHECK(c.solver.c == 0.0);
    CHECK(c.noise.K == 16);
    CHECK(c.noise_K() == 16);
    CHECK(c.basis_size() == 64);
    CHECK(c.domain.quad_x == 48);

    const auto echoed = nlohmann::json::parse(print_config(c));
    CHECK(echoed["noise"]["K"] == 16);
    CHECK(echoed["solver"]["epsilon"] == 0.0);
    CHECK(echoed["noise"]["cB"].is_null());
    CHECK(echoed["ensemble"]["M"] == 100);
}

TEST_CASE("unknown keys are named")
{
    const std::string msg = error_of(R"({"solver": {"epsilonn": 0.1}, "extra": 1})");
    CHECK(msg.find("solver.epsilonn") != std::string::npos);
    CHECK(msg.find("extra") != std::string::npos);
}

TEST_CASE("constraint violations name the field")
{
    CHECK(error_of(R"({"solver": {"dt": -1}})").find("solver.dt") != std::string::npos);
    CHECK(error_of(R"({"solver": {"dt": 0.3, "T": 1}})").find("divide") != std::string::npos);
    CHECK(error_of(R"({"domain": {"d": 3}})").find("domain.d") != std::string::npos);
    CHECK(error_of(R"({"noise": {"K": 1000}})").find("noise.K") != std::string::npos);
    CHECK(error_of(R"({"solver": {"T": "long"}})").find("solver.T") != std::string::npos);
    CHECK(error_of(R"({"noise": {"alpha": "cubic:2"}})").find("noise.alpha") != std::string::npos);
    CHECK(error_of(R"({"domain": {"transverse_bc": "neumann"}})").find("domain.transverse_bc") != std::string::npos);
    CHECK(error_of("[1, 2]") != "");
    CHECK(error_of("{not json") != "");
}

TEST_CASE("fully specified config round-trips")
{
    const std::string text = R"({
      "domain": {"d": 1, "n_x": 10, "n_perp": 6, "quad_x": 60, "quad_perp": 40, "transverse_bc": "periodic"},
      "solver": {"dt": 0.002, "T": 0.5, "epsilon": 0.01, "c": -0.5, "nonlinearity": false, "record_every": 5,
                 "substeps": 2, "forcing": {"coeffs": [0.1, 0.0, 0.2], "omega": 3.0}},
      "initial": {"type": "bump", "coeffs": [], "amplitude": 0.7, "center": 0.4, "width": 0.2},
      "noise": {"K": 5, "alpha": [0.1, 0.2, 0.3, 0.4, 0.5], "beta": "constant:0.25", "seed": 77,
                "modes": [0, 2, 4, 6, 8], "cB": 10.0, "cU": 2.0},
      "ensemble": {"M": 12, "master_seed": 5, "workers": 3, "sweep": {"parameter": "epsilon", "values": [0.1, 0.0]}},
      "output": {"directory": "results", "snapshot_every": 10}
    })";
    const RunConfig c = parse_config(text);
    const RunConfig again = parse_config(print_config(c));
    CHECK(c == again);
    CHECK(print_config(c) == print_config(again));
    CHECK(c.noise.modes == std::vector<int>{0, 2, 4, 6, 8});
    CHECK(*c.noise.cU == 2.0);
}

TEST_CASE("builders")
{
    const RunConfig c = parse_config(R"({"domain": {"n_x": 6, "n_perp": 4},
        "solver": {"forcing": {"coeffs": [1.0], "omega": 0.0}}, "initial": {"coeffs": [0.5, 0.25]}})");
    const SpectralBasis b = build_basis(c.domain);
    const CoeffField u0 = make_initial(c, b);
    CHECK(u0.coeffs[0] == 0.5);
    CHECK(u0.coeffs[1] == 0.25);
    CHECK(u0.coeffs.tail(b.size() - 2).isZero(0.0));
    const SolverConfig s = make_solver_config(c);
    CHECK(s.forcing_at(0.3, b.size())[0] == 1.0);
    const NoiseModel m = make_noise(c, b);
    CHECK(m.K == 6);
    CHECK(m.alpha[0] == 0.5);

    const RunConfig bump = parse_config(R"({"domain": {"n_x": 12, "n_perp": 6}, "initial": {"type": "bump"}})");
    const SpectralBasis bb = build_basis(bump.domain);
    const Vec u = make_initial(bump, bb).coeffs;
    CHECK(u.norm() > 0.1);
    CHECK(std::abs(u[0]) > 0.1);
}

TEST_CASE("tables render the same values as csv and ndjson")
{
    Table t;
    t.columns = {"name", "x", "k", "ok"};
    t.add({std::string("a,b"), 0.1, 3LL, true});
    t.add({std::string("c"), std::nan(""), -2LL, false});
    const std::string csv = render_csv(t);
    CHECK(csv == "name,x,k,ok\n\"a,b\",0.1,3,true\nc,nan,-2,false\n");
    const std::string nd = render_ndjson(t);
    std::istringstream in(nd);
    std::string line;
    std::getline(in, line);
    const auto first = nlohmann::json::parse(line);
    CHECK(first["name"] == "a,b");
    CHECK(first["x"] == 0.1);
    CHECK(first["k"] == 3);
    CHECK(first["ok"] == true);
    std::getline(in, line);
    CHECK(nlohmann::json::parse(line)["x"].is_null());

    Table empty;
    empty.columns = {"check_id", "value"};
    CHECK(render_csv(empty) == "check_id,value\n");
    CHECK(render_ndjson(empty).empty());

    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("unwritable report path is an IO error")
{
    Table t;
    t.columns = {"a"};
    CHECK_THROWS_AS(emit_report(t, "/nonexistent-dir/sub/report.csv", ReportFormat::csv), IoError);
    CHECK_THROWS_AS(load_config("/nonexistent-dir/config.json"), IoError);
}

TEST_CASE("field and basis files round-trip")
{
    const auto b = test::basis(6, 5);
    std::mt19937_64 rng(1);
    const CoeffField u = test::random_field(*b, rng);
    const fs::path dir = scratch_dir();
    const std::string fpath = (dir / "u.zkf").string();
    write_field_file(fpath, *b, u, 0.125);
    const FieldFile back = read_field_file(fpath);
    CHECK(back.time == 0.125);
    CHECK(back.field.coeffs == u.coeffs);
    CHECK(back.field.basis_id == b->id);
    CHECK(back.meta["basis_hash"] == basis_hash_hex(*b));
    {
        std::ifstream in(fpath, std::ios::binary);
        char magic[8];
        in.read(magic, 8);
        CHECK(std::string(magic, 8) == "ZKFIELD1");
    }

    const std::string bpath = (dir / "basis.zkb").string();
    write_basis_file(bpath, *b);
    const BinaryFile bf = read_basis_file(bpath);
    CHECK(bf.meta["config"]["n_x"] == 6);
    CHECK(bf.arrays.at("x_nodes").size() == static_cast<size_t>(b->grid.quad_x));
    CHECK(bf.arrays.at("x_values").size() == static_cast<size_t>(b->grid.quad_x * 6));
    CHECK(bf.arrays.at("x_values")[1] == b->grid.x_tables[0](0, 1));
    CHECK(bf.meta["x_eigenvalues"][0] == b->x_eigenvalues[0]);

    CHECK_THROWS_AS(read_field_file(bpath), ValidationError);  // wrong magic
    write_text((dir / "short.zkf").string(), "ZKFIELD1\x05");
    CHECK_THROWS_AS(read_field_file((dir / "short.zkf").string()), ValidationError);
    CHECK_THROWS_AS(read_field_file((dir / "missing.zkf").string()), IoError);
}

TEST_CASE("paths.csv input")
{
    const fs::path dir = scratch_dir();
    const std::string p = (dir / "paths.csv").string();
    write_text(p, "path_id,time,X,Y,Z,M\n1,0,0,0,0,1\n0,0,1,0,0,2\n1,0.5,0,0,0,1\n0,0.5,2,1,0,2\n");
    const auto ens = read_paths_csv(p);
    REQUIRE(ens.size() == 2);
    CHECK(ens[0].X == std::vector<double>{1.0, 2.0});
    CHECK(ens[1].M == std::vector<double>{1.0, 1.0});

    write_text(p, "path_id,time,X,Y,Z\n0,0,0,0,0\n");
    CHECK_THROWS_AS(read_paths_csv(p), ValidationError);
    write_text(p, "path_id,time,X,Y,Z,M\n0,0,abc,0,0,1\n");
    CHECK_THROWS_AS(read_paths_csv(p), ValidationError);
    write_text(p, "path_id,time,X,Y,Z,M\n0,0,0,0,0,-1\n0,1,0,0,0,1\n");
    CHECK_THROWS_AS(read_paths_csv(p), ValidationError);
}
