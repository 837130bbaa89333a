#include "graphcal/labeling.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "graphcal/errors.hpp"
#include "graphcal/rouge.hpp"
#include "graphcal/text.hpp"

namespace graphcal {

LabelMethod parse_label_method(std::string_view name) {
  if (name == "rouge") return LabelMethod::rouge;
  if (name == "llm_judge" || name == "llm-judge") return LabelMethod::llm_judge;
  if (name == "manual") return LabelMethod::manual;
  throw ConfigError("unknown label method '" + std::string(name) + "'");
}

const char* to_string(LabelMethod method) noexcept {
  switch (method) {
    case LabelMethod::rouge: return "rouge";
    case LabelMethod::llm_judge: return "llm_judge";
    case LabelMethod::manual: return "manual";
  }
  return "?";
}

void LabelerConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (method == LabelMethod::llm_judge && (!judge_endpoint || judge_endpoint->empty())) {
    throw ConfigError("llm_judge labeling requires judge_endpoint");
  }
  if (judge_reasks < 0) throw ConfigError("judge_reasks must be >= 0");
}

QuestionRecord label_by_rouge(QuestionRecord record, double tau, bool overwrite) {
  if (!record.reference_answer) {
    throw DataError("question '" + record.id + "' has no reference_answer to label against");
  }
  if (record.responses.empty()) throw DataError("question '" + record.id + "' has no responses");
  const auto reference = tokenize(*record.reference_answer);
  for (auto& r : record.responses) {
    if (r.label && !overwrite) continue;
    const auto candidate = tokenize(r.text);
    const double score =
        (candidate.empty() || reference.empty()) ? 0.0 : rouge_l_f1(candidate, reference);
    r.label = score >= tau ? 1 : 0;
  }
  return record;
}

std::string labeling_prompt(std::string_view question, std::string_view reference_answer,
                            std::string_view response) {
  std::string prompt =
      "You will be provided with a question, a reference answer, and a student’s answer. "
      "Please evaluate the student’s answer based on the reference answer and provide your "
      "score for the student’s answer in the format: “Score: ”. Assign a score of 0 "
      "for incorrect and 1 for correct. For example, “Score: 0” or “Score: 1”. "
      "Do not include any additional information.\n";
  prompt += "Question: ";
  prompt += question;
  prompt += "\nStudent answer: ";
  prompt += response;
  prompt += "\nReference answer: ";
  prompt += reference_answer;
  prompt += "\nNow, please enter your score. Score:";
  return prompt;
}

std::string rephrasing_prompt(std::string_view question) {
  std::string prompt =
      "You are a helpful assistant. I have a question that I would like to see it rephrased in "
      "multiple ways. Please take the original question and generate several rephrased versions "
      "while maintaining the same meaning, and the question can only have one direct answer. "
      "Here is the original question: ";
  prompt += question;
  prompt += ". Please provide four distinct rephrases of the question.";
  return prompt;
}

std::optional<int> parse_judge_score(std::string_view reply) {
  constexpr std::string_view marker = "Score:";
  std::size_t pos = reply.find(marker);
  while (pos != std::string_view::npos) {
    std::size_t i = pos + marker.size();
    while (i < reply.size() && (reply[i] == ' ' || reply[i] == '\t')) ++i;
    if (i < reply.size() && (reply[i] == '0' || reply[i] == '1')) {
      const bool more_digits = i + 1 < reply.size() && reply[i + 1] >= '0' && reply[i + 1] <= '9';
      if (!more_digits) return reply[i] - '0';
    }
    pos = reply.find(marker, pos + 1);
  }
  return std::nullopt;
}

HttpJudge::HttpJudge(std::string endpoint, std::optional<std::string> api_key, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), retry_(retry) {}

std::string HttpJudge::ask(const std::string& prompt) {
  nlohmann::json request;
  request["prompt"] = prompt;
  const std::string body = post_json(endpoint_, request.dump(), api_key_, retry_);
  try {
    return nlohmann::json::parse(body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed judge reply: ") + e.what(), false);
  }
}

JudgeOutcome label_by_llm_judge(QuestionRecord record, const LabelerConfig& config, Judge& judge) {
  if (!record.reference_answer) {
    throw DataError("question '" + record.id + "' has no reference_answer to label against");
  }
  JudgeOutcome outcome;
  for (std::size_t i = 0; i < record.responses.size(); ++i) {
    auto& r = record.responses[i];
    if (r.label && !config.overwrite) continue;
    const std::string prompt = labeling_prompt(record.question, *record.reference_answer, r.text);
    std::optional<int> score;
    std::string reply;
    for (int ask = 0; ask <= config.judge_reasks && !score; ++ask) {
      reply = judge.ask(prompt);
      score = parse_judge_score(reply);
    }
    if (score) {
      r.label = *score;
    } else {
      if (config.overwrite) r.label.reset();
      outcome.unlabeled.push_back({record.id, i, reply});
    }
  }
  outcome.record = std::move(record);
  return outcome;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::vector<ManualLabel> read_manual_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file '" + path.string() + "'");
  std::string line;
  std::size_t line_number = 0;
  std::vector<ManualLabel> labels;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "question_id" || fields[1] != "response_index" ||
          fields[2] != "label") {
        throw ParseError(line_number, "", "expected header question_id,response_index,label");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw ParseError(line_number, "", "expected 3 columns");
    ManualLabel row;
    row.question_id = fields[0];
    try {
      std::size_t used = 0;
      const long long index = std::stoll(fields[1], &used);
      if (used != fields[1].size() || index < 0) throw std::invalid_argument("index");
      row.response_index = static_cast<std::size_t>(index);
    } catch (const std::exception&) {
      throw ParseError(line_number, "response_index", "expected a non-negative integer");
    }
    if (fields[2] != "0" && fields[2] != "1") {
      throw ParseError(line_number, "label", "expected 0 or 1");
    }
    row.label = fields[2] == "1" ? 1 : 0;
    labels.push_back(std::move(row));
  }
  return labels;
}

std::vector<QuestionRecord> ingest_manual_labels(std::vector<QuestionRecord> records,
                                                 const std::vector<ManualLabel>& labels) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) by_id.emplace(records[i].id, i);

  std::vector<std::string> bad;
  for (std::size_t row = 0; row < labels.size(); ++row) {
    const auto& l = labels[row];
    auto it = by_id.find(l.question_id);
    if (it == by_id.end()) {
      bad.push_back("row " + std::to_string(row + 1) + ": unknown question id '" + l.question_id + "'");
    } else if (l.response_index >= records[it->second].responses.size()) {
      bad.push_back("row " + std::to_string(row + 1) + ": response index " +
                    std::to_string(l.response_index) + " out of range for '" + l.question_id + "'");
    }
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "manual labels reference unknown rows";
    for (const auto& b : bad) os << "; " << b;
    throw DataError(os.str());
  }
  for (const auto& l : labels) {
    records[by_id.at(l.question_id)].responses[l.response_index].label = l.label;
  }
  return records;
}

std::vector<QuestionRecord> ingest_manual_labels(std::vector<QuestionRecord> records,
                                                 const std::filesystem::path& label_file) {
  return ingest_manual_labels(std::move(records), read_manual_labels(label_file));
}

}  // namespace graphcal
