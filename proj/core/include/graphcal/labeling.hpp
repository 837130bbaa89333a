#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "graphcal/http.hpp"
#include "graphcal/types.hpp"

namespace graphcal {

enum class LabelMethod { rouge, llm_judge, manual };

LabelMethod parse_label_method(std::string_view name);
const char* to_string(LabelMethod method) noexcept;

struct LabelerConfig {
  LabelMethod method = LabelMethod::rouge;
  double tau = 0.3;
  std::optional<std::string> judge_endpoint;
  bool overwrite = false;  // replace labels that are already present
  int judge_reasks = 2;
  RetryPolicy retry;

  void validate() const;
};

/// label_i = 1 iff rouge_l_f1(tokenize(r_i), tokenize(reference)) >= tau.
/// Responses without tokens score 0.
QuestionRecord label_by_rouge(QuestionRecord record, double tau, bool overwrite = false);

/// Grading prompt sent to the judge, with question/answer substituted.
std::string labeling_prompt(std::string_view question, std::string_view reference_answer,
                            std::string_view response);

/// Prompt asking for rephrasings of a question (used by sampling jobs that
/// produce multi-prompt datasets).
std::string rephrasing_prompt(std::string_view question);

/// Strict parse of "Score: 0" / "Score: 1". Anything else yields nullopt.
std::optional<int> parse_judge_score(std::string_view reply);

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string ask(const std::string& prompt) = 0;
};

/// {"prompt": "..."} -> {"text": "..."}; bearer token from JUDGE_API_KEY.
class HttpJudge final : public Judge {
 public:
  HttpJudge(std::string endpoint, std::optional<std::string> api_key, RetryPolicy retry);
  std::string ask(const std::string& prompt) override;

 private:
  std::string endpoint_;
  std::optional<std::string> api_key_;
  RetryPolicy retry_;
};

struct JudgeWarning {
  std::string question_id;
  std::size_t response_index = 0;
  std::string last_reply;
};

struct JudgeOutcome {
  QuestionRecord record;
  std::vector<JudgeWarning> unlabeled;
};

JudgeOutcome label_by_llm_judge(QuestionRecord record, const LabelerConfig& config, Judge& judge);

struct ManualLabel {
  std::string question_id;
  std::size_t response_index = 0;
  int label = 0;
};

/// CSV with header question_id,response_index,label.
std::vector<ManualLabel> read_manual_labels(const std::filesystem::path& path);

/// Applies manual labels; they always replace existing labels. Unknown ids or
/// out-of-range indices raise DataError listing every offending row.
std::vector<QuestionRecord> ingest_manual_labels(std::vector<QuestionRecord> records,
                                                 const std::vector<ManualLabel>& labels);
std::vector<QuestionRecord> ingest_manual_labels(std::vector<QuestionRecord> records,
                                                 const std::filesystem::path& label_file);

}  // namespace graphcal
