#pragma once

#include <stdexcept>
#include <string>

namespace qfan {

// Dimension / shape mismatches between vectors, matrices and specs.
struct dimension_error : std::invalid_argument {
    explicit dimension_error(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid parameter values (non-positive sizes, bad regularization, ...).
struct value_error : std::invalid_argument {
    explicit value_error(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or truncated files, checksum mismatches.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// A runtime invariant the library guarantees was violated; indicates a bug,
// not bad user input. Mapped to exit code 3 by the CLI.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

} // namespace qfan
