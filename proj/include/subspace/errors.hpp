#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subspace {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidMatrix : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct InvalidAlpha : ConfigError {
    using ConfigError::ConfigError;
};

struct InvalidSpectrum : Error {
    using Error::Error;
};

struct RankError : Error {
    using Error::Error;
};

struct EmptyClass : Error {
    using Error::Error;
};

struct BatchShapeError : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

struct NonDegenerateBlock : Error {
    using Error::Error;
};

struct BasisMismatch : Error {
    using Error::Error;
};

struct NormalizationError : Error {
    using Error::Error;
};

struct DegenerateUpdate : Error {
    using Error::Error;
};

struct NotPSD : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct UndefinedMetric : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

/// Syntax or binding error while parsing a proposition. Carries the byte
/// offset into the query string where the problem was detected.
class ParseError : public Error {
  public:
    ParseError(const std::string &message, std::size_t position)
        : Error(message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

} // namespace subspace
