#pragma once

#include <stdexcept>
#include <string>

namespace ssreg {

/// Root of every error thrown by this library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller misuse: bad arguments, incompatible shapes or grids. CLI exit code 2.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Problems with an input file's contents. CLI exit code 3.
class DataError : public Error {
  public:
    using Error::Error;
};

/// Numeric failure with no fallback. CLI exit code 4.
class NumericError : public Error {
  public:
    using Error::Error;
};

class DimensionMismatch : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class GridMismatch : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// subtract() would produce a negative observation count.
class NegativeCount : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class EmptyAccumulator : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class NegativeLambda : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

class NonPositiveVariance : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// Schema option names a column the file does not have, or similar.
class SchemaError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

/// A weight in the data is negative.
class NegativeWeight : public DataError {
  public:
    using DataError::DataError;
};

/// Box-Cox transform applied to y <= 0.
class NonPositiveResponse : public DataError {
  public:
    using DataError::DataError;
};

/// Unparseable cell, ragged row, truncated or malformed file.
class ParseError : public DataError {
  public:
    using DataError::DataError;
};

/// Artifact file carries an unsupported schema_version.
class VersionMismatch : public DataError {
  public:
    using DataError::DataError;
};

class IoError : public DataError {
  public:
    using DataError::DataError;
};

/// Cholesky pivot at or below the rank tolerance: matrix is not positive
/// definite and the caller should switch to the pseudo-inverse path.
class NotPositiveDefinite : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Jacobi sweeps exhausted without convergence; input is pathological.
class EigenFailure : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Inverse Box-Cox transform asked for a value outside its domain.
class InverseTransformDomain : public NumericError {
  public:
    using NumericError::NumericError;
};

}  // namespace ssreg
