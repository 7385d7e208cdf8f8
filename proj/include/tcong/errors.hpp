#pragma once

#include <stdexcept>
#include <string>

namespace tcong {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
struct InputError : Error {
    using Error::Error;
};

// Operands living in different rings or groups.
struct MismatchError : Error {
    using Error::Error;
};

// A certified enclosure could not decide a sign.
struct PrecisionError : Error {
    using Error::Error;
};

// A required element is not invertible.
struct NotUnitError : Error {
    using Error::Error;
};

// A documented precondition of a check does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InputError(what);
}

}  // namespace tcong
