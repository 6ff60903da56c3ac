#pragma once

#include <stdexcept>
#include <string>

namespace hbmsim {

/// Base class for all simulator errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Address outside the memory map, or an offset computation left it.
class AddressRangeError : public Error {
public:
    using Error::Error;
};

/// Data does not fit the requested channel, window, or device capacity.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter combination (engine counts, flags, sweep lists).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Internal structure violates its own bookkeeping (counts, ordering).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix dimensions disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite model entry.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// File read/write failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace hbmsim
