#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mibwatch {

enum class ErrorKind {
  Parse,
  EmptyDataset,
  InsufficientData,
  InvalidData,
  Schema,
  Dimension,
  Config,
  Divergence,
  Load,
  Version,
  Alignment,
  Overlap,
  Bounds,
  UndefinedRate,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::EmptyDataset: return "empty dataset";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::InvalidData: return "invalid data";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Divergence: return "training diverged";
    case ErrorKind::Load: return "load error";
    case ErrorKind::Version: return "version error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Overlap: return "overlap error";
    case ErrorKind::Bounds: return "bounds error";
    case ErrorKind::UndefinedRate: return "undefined rate";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed CSV or config input; line is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t epoch)
      : Error(ErrorKind::Divergence, "non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

// Model file problem; field names the offending part of the file.
class LoadError : public Error {
 public:
  LoadError(ErrorKind kind, std::string field, const std::string& what)
      : Error(kind, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace mibwatch
