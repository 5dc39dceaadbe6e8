#pragma once

#include <stdexcept>
#include <string>

namespace brs {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or value contract violated by a caller.
struct ShapeError : Error {
    using Error::Error;
};

// Bad configuration file, CLI arguments, or missing external tools.
struct ConfigError : Error {
    using Error::Error;
};

// Corrupt bitstream, checkpoint/container mismatch, truncated payload.
struct IntegrityError : Error {
    using Error::Error;
};

}  // namespace brs
