#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Raised when a factorization meets fewer independent directions than requested.
struct RankDeficiencyError : Error {
    RankDeficiencyError(const std::string& msg, std::size_t achievable_rank, std::size_t column = static_cast<std::size_t>(-1))
        : Error(msg), achievable(achievable_rank), column(column) {}
    std::size_t achievable;
    std::size_t column;   // defective column index when known
};

struct NotSymmetricError : Error {
    using Error::Error;
};

struct SingularMatrixError : Error {
    using Error::Error;
};

struct SelectionError : Error {
    using Error::Error;
};

struct SingularSigmaError : Error {
    SingularSigmaError(const std::string& msg, std::size_t rank) : Error(msg), rank(rank) {}
    std::size_t rank;
};

struct BlowUpError : Error {
    BlowUpError(const std::string& msg, double t, std::size_t column)
        : Error(msg), t(t), column(column) {}
    double t;
    std::size_t column;
};

struct ModelError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    ConfigError(const std::string& msg, std::vector<std::string> bad_fields)
        : Error(msg), fields(std::move(bad_fields)) {}
    std::vector<std::string> fields;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace tdb
