#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphcal/types.hpp"

namespace graphcal {

struct ValidationError {
  std::string question_id;
  std::string field_path;  // e.g. "responses[3].embedding"
  std::string message;

  bool operator==(const ValidationError&) const = default;
};

/// Checks every record invariant. Returns one entry per violation; an empty
/// result means the dataset is valid.
///
/// is_primary: more than one `true` is an error, and so is a question where
/// every response carries an explicit `false`. A question with no explicit
/// primary is valid; build_graph assigns one.
std::vector<ValidationError> validate_dataset(std::span<const QuestionRecord> records);

/// One JSON object per line. Optional fields that are absent are omitted.
std::string record_to_json_line(const QuestionRecord& record);
QuestionRecord record_from_json_line(std::string_view line, std::size_t line_number = 1);

std::vector<QuestionRecord> read_dataset(const std::filesystem::path& path);
void write_dataset(std::span<const QuestionRecord> records, const std::filesystem::path& path);

/// Throws DataError summarizing the first few validation errors, if any.
void require_valid(std::span<const QuestionRecord> records);

}  // namespace graphcal
