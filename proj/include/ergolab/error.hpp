#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or an unusable configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operation not defined for the given measure variant or dimension.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Caller misuse: empty inputs, sample counts below a stated minimum.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace ergolab
