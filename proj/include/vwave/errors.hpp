#pragma once

#include <stdexcept>
#include <string>

namespace vwave {

/** Base class for every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Errors caused by bad input (CLI exit code 2).
class ConfigError : public Error { using Error::Error; };
class ArgumentError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };

// Errors raised while computing (CLI exit code 3).
class NumericalError : public Error { using Error::Error; };
class ResolutionError : public NumericalError { using NumericalError::NumericalError; };
class StateError : public NumericalError { using NumericalError::NumericalError; };
class TruncationError : public NumericalError { using NumericalError::NumericalError; };
class SolverError : public NumericalError { using NumericalError::NumericalError; };
class CapacityError : public NumericalError { using NumericalError::NumericalError; };
class BoundaryLayerError : public NumericalError { using NumericalError::NumericalError; };
class ConsistencyError : public NumericalError { using NumericalError::NumericalError; };

inline bool is_input_error(const std::exception& e)
{
    return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e)
        || dynamic_cast<const DomainError*>(&e) || dynamic_cast<const GeometryError*>(&e);
}

} // namespace vwave
