#pragma once

#include <stdexcept>
#include <string>

namespace cshock {

// Bad caller input: out-of-range index, malformed file, violated precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that cannot produce a meaningful number (non-PSD matrix,
// unidentifiable parameter).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cshock
