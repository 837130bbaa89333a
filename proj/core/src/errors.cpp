#include "graphcal/errors.hpp"

namespace graphcal {

namespace {
std::string format_parse_error(std::size_t line, const std::string& field,
                               const std::string& message) {
  std::string out = "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += "field '" + field + "': ";
  return out + message;
}
}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& message)
    : DataError(format_parse_error(line, field, message)),
      line_(line),
      field_(std::move(field)) {}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::transport: return "transport";
    case ErrorKind::domain: return "domain";
  }
  return "unknown";
}

}  // namespace graphcal
