#pragma once

#include <stdexcept>
#include <string>

namespace csr {

// Error taxonomy mirrors the CLI exit codes: usage=1, data=2, numeric=3.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

struct DataError : Error {
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Shape mismatches, non-finite values, infeasible losses.
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

struct ShapeError : NumericError {
    explicit ShapeError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace csr
