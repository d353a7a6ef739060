#pragma once

#include <stdexcept>
#include <string>

namespace flamedet {

// Base class for all library errors. CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/vector dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration (bad block parameters, image size, flag values).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed file content (weight container, PPM, label files).
struct FormatError : Error {
    using Error::Error;
};

// Weight store does not satisfy a graph's requirements.
struct LoadError : Error {
    using Error::Error;
};

// Scalar argument outside its mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

// Dataset contents violate the expected layout or pairing rules.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace flamedet
