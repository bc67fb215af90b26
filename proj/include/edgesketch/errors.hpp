#pragma once

#include <stdexcept>
#include <string>

namespace edgesketch {

// Invalid configuration or argument value. The message names the offending key.
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (parse failures, label/edge length mismatch).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Timestamp moved backwards past the current time bin.
struct OrderingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called before the object has the state it needs.
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace edgesketch
