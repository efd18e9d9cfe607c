#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "zk/basis.hpp"
#include "zk/gronwall.hpp"

namespace zk {

/// Shortest decimal text that reads back to the same double; "nan", "inf",
/// "-inf" for non-finite values.
std::string format_double(double x);

using Cell = std::variant<std::string, double, long long, bool>;

/// A rectangular result table, rendered as CSV or NDJSON (one object per row,
/// keys equal to the CSV header).
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

enum class ReportFormat { csv, ndjson };

std::string render_csv(const Table& t);
std::string render_ndjson(const Table& t);
/// Writes the table; throws IoError if the file cannot be written.
void emit_report(const Table& t, const std::string& path, ReportFormat format);
void write_text(const std::string& path, const std::string& text);

/// One row of a verification report.
struct CheckRow {
    std::string check_id;
    std::string paper_ref;  // tag of the identity or bound being checked
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

Table report_table(const std::vector<CheckRow>& rows);

// Binary containers: 8-byte magic, uint32 LE metadata length, UTF-8 JSON
// metadata, then little-endian float64 arrays in the order the metadata lists.
struct BinaryFile {
    nlohmann::json meta;
    std::map<std::string, std::vector<double>> arrays;
};

void write_binary(const std::string& path, const char magic[8], const nlohmann::json& meta,
                  const std::vector<std::pair<std::string, std::vector<double>>>& arrays);
BinaryFile read_binary(const std::string& path, const char magic[8]);

/// "ZKBASIS1": config, tolerances, eigenvalues; arrays of x-mode tables,
/// endpoint values and quadrature data.
void write_basis_file(const std::string& path, const SpectralBasis& basis);
BinaryFile read_basis_file(const std::string& path);

/// "ZKFIELD1": {time, n, d, basis_hash} and the coefficients.
void write_field_file(const std::string& path, const SpectralBasis& basis, const CoeffField& field, double time);
struct FieldFile {
    CoeffField field;
    double time = 0.0;
    nlohmann::json meta;
};
FieldFile read_field_file(const std::string& path);

/// paths.csv with columns path_id, time, X, Y, Z, M; members ordered by id.
std::vector<PathProcess> read_paths_csv(const std::string& path);

}  // namespace zk
