#pragma once

#include <stdexcept>
#include <string>

namespace tinycore {

// Base for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data violates a type invariant (non-finite entries, negative weights, ...).
struct InvalidInput : Error {
    using Error::Error;
};

// A parameter is out of its admissible range.
struct InvalidArgument : Error {
    using Error::Error;
};

// The request would exceed a hard size guard (e.g. exhaustive search).
struct ResourceLimit : Error {
    using Error::Error;
};

// Querying a summary that has not seen any data.
struct EmptyState : Error {
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

inline void require_input(bool ok, const char* what) {
    if (!ok) throw InvalidInput(what);
}

}  // namespace detail
}  // namespace tinycore
