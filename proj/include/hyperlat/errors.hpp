#pragma once

#include <stdexcept>

namespace hyperlat {

// Raised when an argument violates an operation's precondition.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when an enumeration would exceed the hard resource guards.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hyperlat
