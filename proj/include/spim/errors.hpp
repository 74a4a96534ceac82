#pragma once

#include <stdexcept>
#include <string>

namespace spim {

// Base of every error thrown by the library. The CLI maps ConfigError and
// its relatives to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Array lengths or lattice shapes disagree.
class DimensionError : public Error {
public:
  using Error::Error;
};

// A value lies outside its admissible range (e.g. an amplitude not in (0,1]).
class DomainError : public Error {
public:
  using Error::Error;
};

// Inconsistent configuration: detector grid too small, bad solver knobs, ...
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed coupling target (e.g. G(k) != G(-k)).
class SpecError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

// Origin calibration could not locate an interior intensity peak.
class CalibrationError : public Error {
public:
  using Error::Error;
};

// File could not be read, written or parsed.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace spim
