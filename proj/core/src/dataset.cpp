#include "graphcal/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "graphcal/errors.hpp"

namespace graphcal {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<ValidationError> validate_dataset(std::span<const QuestionRecord> records) {
  std::vector<ValidationError> errors;
  std::set<std::string> seen_ids;
  std::optional<std::size_t> dataset_dim;

  for (const auto& q : records) {
    const auto fail = [&](std::string path, std::string message) {
      errors.push_back({q.id, std::move(path), std::move(message)});
    };

    if (q.id.empty()) fail("id", "empty question id");
    if (!seen_ids.insert(q.id).second) fail("id", "duplicate question id");
    if (q.responses.size() < 2) {
      fail("responses", "need at least 2 responses, got " + std::to_string(q.responses.size()));
    }

    const int prompt_limit = 1 + static_cast<int>(q.rephrasings.size());
    std::size_t primary_true = 0;
    std::size_t primary_explicit = 0;

    for (std::size_t i = 0; i < q.responses.size(); ++i) {
      const auto& r = q.responses[i];
      const std::string base = "responses[" + std::to_string(i) + "]";

      if (r.prompt_index < 0 || r.prompt_index >= prompt_limit) {
        fail(base + ".prompt_index", "prompt_index " + std::to_string(r.prompt_index) +
                                         " outside [0, " + std::to_string(prompt_limit) + ")");
      }
      if (r.token_logprob_sum && !r.token_count) {
        fail(base + ".token_count", "token_logprob_sum present without token_count");
      }
      if (r.token_count && *r.token_count < 1) {
        fail(base + ".token_count", "token_count must be >= 1");
      }
      if (r.label && *r.label != 0 && *r.label != 1) {
        fail(base + ".label", "label must be 0 or 1");
      }
      if (r.embedding) {
        const std::size_t dim = r.embedding->size();
        if (dim == 0) {
          fail(base + ".embedding", "empty embedding");
        } else if (!dataset_dim) {
          dataset_dim = dim;
        } else if (*dataset_dim != dim) {
          fail(base + ".embedding", "embedding dimension " + std::to_string(dim) +
                                        " does not match dataset dimension " +
                                        std::to_string(*dataset_dim));
        }
      }
      if (r.is_primary) {
        ++primary_explicit;
        if (*r.is_primary) ++primary_true;
      }
    }

    if (primary_true > 1) {
      fail("responses.is_primary", std::to_string(primary_true) + " responses marked primary");
    } else if (primary_true == 0 && !q.responses.empty() &&
               primary_explicit == q.responses.size()) {
      fail("responses.is_primary", "every response explicitly non-primary");
    }
  }
  return errors;
}

void require_valid(std::span<const QuestionRecord> records) {
  const auto errors = validate_dataset(records);
  if (errors.empty()) return;
  std::ostringstream os;
  os << errors.size() << " validation error(s)";
  for (std::size_t i = 0; i < errors.size() && i < 5; ++i) {
    os << "; question '" << errors[i].question_id << "' " << errors[i].field_path << ": "
       << errors[i].message;
  }
  throw DataError(os.str());
}

namespace {

ordered_json response_to_json(const ResponseRecord& r) {
  ordered_json j;
  j["text"] = r.text;
  j["prompt_index"] = r.prompt_index;
  if (r.embedding) j["embedding"] = *r.embedding;
  if (r.token_logprob_sum) j["token_logprob_sum"] = *r.token_logprob_sum;
  if (r.token_count) j["token_count"] = *r.token_count;
  if (r.label) j["label"] = *r.label;
  if (r.is_primary) j["is_primary"] = *r.is_primary;
  return j;
}

class FieldReader {
 public:
  FieldReader(const json& object, std::size_t line, std::string prefix)
      : object_(object), line_(line), prefix_(std::move(prefix)) {}

  template <class T>
  T required(const char* name) const {
    auto it = object_.find(name);
    if (it == object_.end() || it->is_null()) {
      throw ParseError(line_, path(name), "missing required field");
    }
    return convert<T>(*it, name);
  }

  template <class T>
  std::optional<T> optional(const char* name) const {
    auto it = object_.find(name);
    if (it == object_.end() || it->is_null()) return std::nullopt;
    return convert<T>(*it, name);
  }

  std::string path(const char* name) const { return prefix_ + name; }

 private:
  template <class T>
  T convert(const json& value, const char* name) const {
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!value.is_number_integer()) throw ParseError(line_, path(name), "expected integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw ParseError(line_, path(name), "expected number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) throw ParseError(line_, path(name), "expected boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) throw ParseError(line_, path(name), "expected string");
      }
      return value.get<T>();
    } catch (const json::exception& e) {
      throw ParseError(line_, path(name), e.what());
    }
  }

  const json& object_;
  std::size_t line_;
  std::string prefix_;
};

ResponseRecord response_from_json(const json& j, std::size_t line, std::size_t index) {
  const std::string prefix = "responses[" + std::to_string(index) + "].";
  if (!j.is_object()) throw ParseError(line, prefix.substr(0, prefix.size() - 1), "expected object");
  FieldReader f(j, line, prefix);
  ResponseRecord r;
  r.text = f.required<std::string>("text");
  r.prompt_index = f.optional<int>("prompt_index").value_or(0);
  r.embedding = f.optional<std::vector<double>>("embedding");
  r.token_logprob_sum = f.optional<double>("token_logprob_sum");
  r.token_count = f.optional<int>("token_count");
  r.label = f.optional<int>("label");
  r.is_primary = f.optional<bool>("is_primary");
  return r;
}

}  // namespace

std::string record_to_json_line(const QuestionRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["question"] = record.question;
  j["rephrasings"] = record.rephrasings;
  if (record.reference_answer) j["reference_answer"] = *record.reference_answer;
  auto responses = ordered_json::array();
  for (const auto& r : record.responses) responses.push_back(response_to_json(r));
  j["responses"] = std::move(responses);
  return j.dump();
}

QuestionRecord record_from_json_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, "", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_number, "", "expected a JSON object");

  FieldReader f(j, line_number, "");
  QuestionRecord q;
  q.id = f.required<std::string>("id");
  q.question = f.required<std::string>("question");
  q.rephrasings = f.optional<std::vector<std::string>>("rephrasings").value_or(std::vector<std::string>{});
  q.reference_answer = f.optional<std::string>("reference_answer");

  auto it = j.find("responses");
  if (it == j.end() || it->is_null()) throw ParseError(line_number, "responses", "missing required field");
  if (!it->is_array()) throw ParseError(line_number, "responses", "expected array");
  q.responses.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    q.responses.push_back(response_from_json((*it)[i], line_number, i));
  }
  return q;
}

std::vector<QuestionRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
  std::vector<QuestionRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    records.push_back(record_from_json_line(line, line_number));
  }
  return records;
}

void write_dataset(std::span<const QuestionRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  for (const auto& record : records) out << record_to_json_line(record) << '\n';
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace graphcal
