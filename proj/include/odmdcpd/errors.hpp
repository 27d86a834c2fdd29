#pragma once

#include <stdexcept>

namespace odmdcpd {

// Invalid setup: window layout, ranks, shapes fixed at configuration time.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (CSV rows, timestamps, batch shapes).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure (singular solve, loss of positive definiteness by
// round-off, non-finite values).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation not valid in the current state (revert past stored history,
// window shrank below rank support).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace odmdcpd
