#include "tdb/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tdb {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit_metrics(const MetricTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("emit_metrics: cannot open " + path);
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out << ',';
        out << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) throw IoError("emit_metrics: write failed for " + path);
}

MetricTable read_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_metrics: cannot open " + path);
    MetricTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            while (std::getline(ss, cell, ',')) t.header.push_back(cell);
            first = false;
        } else {
            std::vector<double> row;
            while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

void emit_lines(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("emit_lines: cannot open " + path);
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError("emit_lines: write failed for " + path);
}

void write_snapshot(const Matrix& m, double t, const std::string& path_base) {
    {
        std::ofstream out(path_base + ".f64", std::ios::binary);
        if (!out) throw IoError("write_snapshot: cannot open " + path_base + ".f64");
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.rows() * m.cols() * sizeof(double)));
        if (!out) throw IoError("write_snapshot: write failed for " + path_base + ".f64");
    }
    nlohmann::json side;
    side["rows"] = m.rows();
    side["cols"] = m.cols();
    side["t"] = t;
    side["layout"] = "column-major";
    side["dtype"] = "float64-le";
    std::ofstream js(path_base + ".json");
    if (!js) throw IoError("write_snapshot: cannot open " + path_base + ".json");
    js << side.dump(2) << '\n';
}

Matrix read_snapshot(const std::string& path_base, double* t) {
    std::ifstream js(path_base + ".json");
    if (!js) throw IoError("read_snapshot: cannot open " + path_base + ".json");
    nlohmann::json side = nlohmann::json::parse(js);
    const std::size_t rows = side.at("rows").get<std::size_t>();
    const std::size_t cols = side.at("cols").get<std::size_t>();
    if (t) *t = side.at("t").get<double>();
    Matrix m(rows, cols);
    std::ifstream in(path_base + ".f64", std::ios::binary);
    if (!in) throw IoError("read_snapshot: cannot open " + path_base + ".f64");
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw IoError("read_snapshot: truncated " + path_base + ".f64");
    return m;
}

std::string matrix_checksum(const Matrix& m) {
    std::uint64_t h = 1469598103934665603ull;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(m.data());
    const std::size_t count = m.rows() * m.cols() * sizeof(double);
    for (std::size_t i = 0; i < count; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

bool file_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) throw IoError("file_identical: cannot open " + (!fa ? a : b));
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

}  // namespace tdb
