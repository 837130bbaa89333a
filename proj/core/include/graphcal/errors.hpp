#pragma once

#include <stdexcept>
#include <string>

namespace graphcal {

enum class ErrorKind {
  config,     // bad options, inconsistent configuration
  data,       // malformed or incomplete dataset content
  numeric,    // optimization / linear algebra failure
  transport,  // external service unreachable or non-2xx
  domain,     // argument outside an operation's domain
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

struct TransportError : Error {
  TransportError(const std::string& what, bool retryable)
      : Error(ErrorKind::transport, what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

/// Parse failure inside a line-delimited file. `line` is 1-based.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace graphcal
