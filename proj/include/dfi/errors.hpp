#pragma once

#include <stdexcept>
#include <string>

namespace dfi {

/// Malformed input: bad files, invalid settings, violated preconditions.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation could not produce a usable result (rank deficiency, non-finite target, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dfi
