#pragma once

#include <string>
#include <vector>

#include "tdb/matrix.hpp"

namespace tdb {

// One metric series: a header row and numeric rows, serialized with 17
// significant digits so values round-trip exactly.
struct MetricTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void emit_metrics(const MetricTable& table, const std::string& path);
MetricTable read_metrics(const std::string& path);

// formats one double at round-trip precision
std::string format_double(double v);

// plain text lines (per-step point logs with index lists)
void emit_lines(const std::vector<std::string>& lines, const std::string& path);

// raw little-endian float64 column-major dump plus a JSON sidecar with the
// shape and time stamp
void write_snapshot(const Matrix& m, double t, const std::string& path_base);
Matrix read_snapshot(const std::string& path_base, double* t = nullptr);

// FNV-1a over the raw matrix bytes; logged so runs can assert they share one
// initial ensemble
std::string matrix_checksum(const Matrix& m);

bool file_identical(const std::string& a, const std::string& b);

}  // namespace tdb
