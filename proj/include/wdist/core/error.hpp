#pragma once

#include <stdexcept>
#include <string>

namespace wdist {

/// Error category, also used as the CLI exit-code family.
enum class ErrorKind {
  parameter,
  dimension,
  compatibility,
  parse,
  generation,
  singularity,
  divergence,
  numerical,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::compatibility: return "compatibility";
    case ErrorKind::parse: return "parse";
    case ErrorKind::generation: return "generation";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define WDIST_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

WDIST_DEFINE_ERROR(ParameterError, parameter)
WDIST_DEFINE_ERROR(DimensionError, dimension)
WDIST_DEFINE_ERROR(CompatibilityError, compatibility)
WDIST_DEFINE_ERROR(SingularityError, singularity)
WDIST_DEFINE_ERROR(NumericalError, numerical)
WDIST_DEFINE_ERROR(IoError, io)

#undef WDIST_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(ErrorKind::parse, line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class GenerationError : public Error {
 public:
  GenerationError(const std::string& what, int bin)
      : Error(ErrorKind::generation, what), bin_(bin) {}
  int bin() const noexcept { return bin_; }

 private:
  int bin_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(ErrorKind::divergence, what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace wdist
