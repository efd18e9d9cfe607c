#include "zk/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zk/errors.hpp"

namespace zk {

using nlohmann::json;

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void Table::add(std::vector<Cell> row)
{
    require(row.size() == columns.size(), "table row width differs from the header");
    rows.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return v;
            if constexpr (std::is_same_v<T, double>) return format_double(v);
            if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
            if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        },
        c);
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string cell_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return json(v).dump();
            if constexpr (std::is_same_v<T, double>) return std::isfinite(v) ? format_double(v) : "null";
            if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
            if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        },
        c);
}

void put_u32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double x)
{
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::vector<double> flatten(const Mat& m)
{
    // row-major
    std::vector<double> out;
    out.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
    return out;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string render_csv(const Table& t)
{
    std::string out;
    for (size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + csv_escape(t.columns[j]);
    out += "\n";
    for (const auto& row : t.rows) {
        for (size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + csv_escape(cell_text(row[j]));
        out += "\n";
    }
    return out;
}

std::string render_ndjson(const Table& t)
{
    std::string out;
    for (const auto& row : t.rows) {
        out += "{";
        for (size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + json(t.columns[j]).dump() + ":" + cell_json(row[j]);
        out += "}\n";
    }
    return out;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing " + path);
}

void emit_report(const Table& t, const std::string& path, ReportFormat format)
{
    write_text(path, format == ReportFormat::csv ? render_csv(t) : render_ndjson(t));
}

Table report_table(const std::vector<CheckRow>& rows)
{
    Table t;
    t.columns = {"check_id", "paper_ref", "value", "tolerance", "pass"};
    for (const auto& r : rows) t.add({r.check_id, r.paper_ref, r.value, r.tolerance, r.pass});
    return t;
}

void write_binary(const std::string& path, const char magic[8], const json& meta,
                  const std::vector<std::pair<std::string, std::vector<double>>>& arrays)
{
    json m = meta;
    json layout = json::array();
    for (const auto& [name, data] : arrays) layout.push_back({{"name", name}, {"length", data.size()}});
    m["arrays"] = layout;
    const std::string text = m.dump();
    std::string out(magic, 8);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (const auto& [name, data] : arrays)
        for (double x : data) put_f64(out, x);
    write_text(path, out);
}

BinaryFile read_binary(const std::string& path, const char magic[8])
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    if (s.size() < 12 || std::memcmp(s.data(), magic, 8) != 0)
        throw ValidationError(path + ": bad magic (expected " + std::string(magic, 8) + ")");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[8 + static_cast<size_t>(i)])) << (8 * i);
    if (12 + static_cast<size_t>(len) > s.size()) throw ValidationError(path + ": truncated metadata");
    BinaryFile f;
    try {
        f.meta = json::parse(s.substr(12, len));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": bad metadata: " + e.what());
    }
    size_t pos = 12 + len;
    for (const auto& a : f.meta.at("arrays")) {
        const size_t n = a.at("length").get<size_t>();
        if (pos + 8 * n > s.size()) throw ValidationError(path + ": truncated array " + a.at("name").get<std::string>());
        std::vector<double> data(n);
        for (size_t k = 0; k < n; ++k) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + 8 * k + static_cast<size_t>(i)])) << (8 * i);
            data[k] = std::bit_cast<double>(bits);
        }
        pos += 8 * n;
        f.arrays[a.at("name").get<std::string>()] = std::move(data);
    }
    return f;
}

void write_basis_file(const std::string& path, const SpectralBasis& b)
{
    const auto& c = b.config;
    const auto& g = b.grid;
    json meta = {{"format", "ZKBASIS1"},
                 {"config",
                  {{"d", c.d},
                   {"n_x", c.n_x},
                   {"n_perp", c.n_perp},
                   {"quad_x", c.quad_x},
                   {"quad_perp", c.quad_perp},
                   {"transverse_bc", to_string(c.transverse_bc)}}},
                 {"basis_hash", basis_hash_hex(b)},
                 {"root_tolerance", b.root_tolerance},
                 {"x_eigenvalues", to_std(b.x_eigenvalues)},
                 {"perp_wavenumbers", b.perp_wavenumbers},
                 {"L_eigenvalues", to_std(b.L_eigenvalues)},
                 {"mode_x", b.mode_x},
                 {"mode_perp", b.mode_perp},
                 {"x_table_layout", "row-major quad_x x n_x"}};
    std::vector<std::pair<std::string, std::vector<double>>> arrays = {
        {"x_nodes", to_std(g.x_nodes)},
        {"x_weights", to_std(g.x_weights)},
        {"x_values", flatten(g.x_tables[0])},
        {"x_d1", flatten(g.x_tables[1])},
        {"x_d2", flatten(g.x_tables[2])},
        {"x_value_at_0", to_std(b.x_value_at_0)},
        {"x_value_at_1", to_std(b.x_value_at_1)},
        {"x_dx_at_0", to_std(b.x_dx_at_0)},
        {"x_dx_at_1", to_std(b.x_dx_at_1)},
        {"x_dxx_at_0", to_std(b.x_dxx_at_0)},
        {"x_dxx_at_1", to_std(b.x_dxx_at_1)},
        {"perp_nodes", to_std(g.perp_nodes)},
        {"perp_weights", to_std(g.perp_weights)},
    };
    write_binary(path, "ZKBASIS1", meta, arrays);
}

BinaryFile read_basis_file(const std::string& path) { return read_binary(path, "ZKBASIS1"); }

void write_field_file(const std::string& path, const SpectralBasis& b, const CoeffField& f, double time)
{
    check_field(b, f);
    json meta = {{"format", "ZKFIELD1"}, {"time", time}, {"n", b.size()}, {"d", b.config.d}, {"basis_hash", basis_hash_hex(b)}};
    write_binary(path, "ZKFIELD1", meta, {{"coeffs", to_std(f.coeffs)}});
}

FieldFile read_field_file(const std::string& path)
{
    BinaryFile b = read_binary(path, "ZKFIELD1");
    FieldFile out;
    out.meta = b.meta;
    out.time = b.meta.at("time").get<double>();
    const auto& c = b.arrays.at("coeffs");
    if (static_cast<int>(c.size()) != b.meta.at("n").get<int>()) throw ValidationError(path + ": coefficient count mismatch");
    out.field.coeffs = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    out.field.basis_id = std::stoull(b.meta.at("basis_hash").get<std::string>(), nullptr, 16);
    return out;
}

std::vector<PathProcess> read_paths_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path + ": empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            while (!col.empty() && (col.back() == '\r' || col.back() == ' ')) col.pop_back();
            header.push_back(col);
        }
    }
    const std::vector<std::string> want = {"path_id", "time", "X", "Y", "Z", "M"};
    std::map<std::string, size_t> idx;
    for (size_t j = 0; j < header.size(); ++j) idx[header[j]] = j;
    for (const auto& w : want) require(idx.count(w) > 0, path + ": missing column " + w);

    std::map<long long, PathProcess> by_id;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        require(cells.size() == header.size(), path + ":" + std::to_string(lineno) + ": wrong number of fields");
        auto num = [&](const std::string& name) {
            const std::string& s = cells[idx[name]];
            double v = 0.0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            require(res.ec == std::errc() && (res.ptr == s.data() + s.size() || *res.ptr == '\r'),
                    path + ":" + std::to_string(lineno) + ": bad number in column " + name);
            return v;
        };
        const double id = num("path_id");
        require(id == std::floor(id), path + ":" + std::to_string(lineno) + ": path_id must be an integer");
        auto& p = by_id[static_cast<long long>(id)];
        p.times.push_back(num("time"));
        p.X.push_back(num("X"));
        p.Y.push_back(num("Y"));
        p.Z.push_back(num("Z"));
        p.M.push_back(num("M"));
    }
    std::vector<PathProcess> out;
    for (auto& [id, p] : by_id) {
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace zk
