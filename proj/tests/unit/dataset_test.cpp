#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "graphcal/dataset.hpp"
#include "graphcal/errors.hpp"

namespace graphcal {
namespace {

namespace fs = std::filesystem;

QuestionRecord minimal(const std::string& id) {
  QuestionRecord q;
  q.id = id;
  q.question = "What is the capital of France?";
  ResponseRecord a;
  a.text = "Paris";
  a.is_primary = true;
  ResponseRecord b;
  b.text = "Lyon";
  q.responses = {a, b};
  return q;
}

QuestionRecord rich(const std::string& id) {
  QuestionRecord q = minimal(id);
  q.rephrasings = {"Which city is France's capital?", "Name the French capital, « vite » é."};
  q.reference_answer = "Paris";
  q.responses[0].embedding = std::vector<double>{0.1, -0.2, 0.30000000000000004};
  q.responses[0].token_logprob_sum = -1.2345678901234567;
  q.responses[0].token_count = 3;
  q.responses[0].label = 1;
  q.responses[1].embedding = std::vector<double>{1e-300, 2.5, -0.0};
  q.responses[1].prompt_index = 2;
  q.responses[1].is_primary = false;
  q.responses[1].label = 0;
  return q;
}

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "graphcal_dataset_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Validate, MinimalRecordIsValid) { EXPECT_TRUE(validate_dataset(std::vector{minimal("q1")}).empty()); }

TEST(Validate, TwoPrimariesNameTheQuestion) {
  auto q = minimal("q7");
  q.responses[1].is_primary = true;
  const auto errors = validate_dataset(std::vector{q});
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].question_id, "q7");
  EXPECT_EQ(errors[0].field_path, "responses.is_primary");
}

TEST(Validate, MixedEmbeddingDimensions) {
  auto q = minimal("q1");
  q.responses[0].embedding = std::vector<double>(384, 0.1);
  q.responses[1].embedding = std::vector<double>(768, 0.1);
  const auto errors = validate_dataset(std::vector{q});
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].field_path, "responses[1].embedding");
  EXPECT_NE(errors[0].message.find("768"), std::string::npos);
}

TEST(Validate, DimensionIsDatasetWide) {
  auto a = minimal("a");
  auto b = minimal("b");
  for (auto& r : a.responses) r.embedding = std::vector<double>(4, 1.0);
  for (auto& r : b.responses) r.embedding = std::vector<double>(5, 1.0);
  EXPECT_EQ(validate_dataset(std::vector{a, b}).size(), 2u);
}

TEST(Validate, OneErrorPerViolation) {
  auto q = minimal("");
  q.responses[0].token_logprob_sum = -1.0;  // no token_count
  q.responses[1].prompt_index = 1;          // no rephrasings
  q.responses[1].label = 2;
  const auto errors = validate_dataset(std::vector{q});
  std::vector<std::string> paths;
  for (const auto& e : errors) paths.push_back(e.field_path);
  EXPECT_EQ(paths, (std::vector<std::string>{"id", "responses[0].token_count", "responses[1].prompt_index",
                                             "responses[1].label"}));
}

TEST(Validate, CountsAndIds) {
  auto single = minimal("s");
  single.responses.pop_back();
  auto zero_tokens = minimal("z");
  zero_tokens.responses[0].token_count = 0;
  auto dup = minimal("s");
  const auto errors = validate_dataset(std::vector{single, zero_tokens, dup});
  ASSERT_EQ(errors.size(), 3u);
  EXPECT_EQ(errors[0].field_path, "responses");
  EXPECT_EQ(errors[1].field_path, "responses[0].token_count");
  EXPECT_EQ(errors[2].message, "duplicate question id");
}

TEST(Validate, PrimaryMayBeLeftToGraphConstruction) {
  auto q = minimal("q");
  for (auto& r : q.responses) r.is_primary.reset();
  EXPECT_TRUE(validate_dataset(std::vector{q}).empty());
  for (auto& r : q.responses) r.is_primary = false;
  EXPECT_EQ(validate_dataset(std::vector{q}).size(), 1u);
}

TEST(Validate, IsPure) {
  auto q = minimal("q");
  q.responses[1].is_primary = true;
  const std::vector<QuestionRecord> data{q, minimal("r")};
  EXPECT_EQ(validate_dataset(data), validate_dataset(data));
}

TEST(Serialization, RoundTripKeepsOptionalPresence) {
  const std::vector<QuestionRecord> records{minimal("a"), rich("b"), rich("c")};
  const auto path = temp_file("roundtrip.jsonl");
  write_dataset(records, path);
  EXPECT_EQ(read_dataset(path), records);
}

TEST(Serialization, OptionalFieldsAreOmitted) {
  const auto line = record_to_json_line(minimal("a"));
  EXPECT_EQ(line.find("reference_answer"), std::string::npos);
  EXPECT_EQ(line.find("null"), std::string::npos);
  EXPECT_EQ(line.find("embedding"), std::string::npos);
  EXPECT_EQ(line.find('\n'), std::string::npos);
}

TEST(Serialization, EmptyFileAndBlankLines) {
  const auto path = temp_file("empty.jsonl");
  { std::ofstream(path) << ""; }
  EXPECT_TRUE(read_dataset(path).empty());
  { std::ofstream(path) << "\n" << record_to_json_line(minimal("a")) << "\n\n"; }
  EXPECT_EQ(read_dataset(path).size(), 1u);
}

TEST(Serialization, TruncatedLineReportsLineNumber) {
  const auto path = temp_file("truncated.jsonl");
  const auto good = record_to_json_line(minimal("a"));
  { std::ofstream(path) << good << "\n" << good.substr(0, good.size() / 2) << "\n"; }
  try {
    read_dataset(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Serialization, MissingFieldIsNamed) {
  try {
    record_from_json_line(R"({"id":"x","question":"q","responses":[{"prompt_index":0}]})", 4);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_EQ(e.field(), "responses[0].text");
  }
  EXPECT_THROW(record_from_json_line(R"({"question":"q","responses":[]})"), ParseError);
  EXPECT_THROW(record_from_json_line(R"({"id":"x","question":"q","responses":[{"text":"a","label":"yes"}]})"),
               ParseError);
}

TEST(Serialization, MissingFileIsDataError) {
  EXPECT_THROW(read_dataset(temp_file("does_not_exist.jsonl")), DataError);
}

TEST(RequireValid, SummarizesErrors) {
  auto q = minimal("bad");
  q.responses[1].is_primary = true;
  try {
    require_valid(std::vector{q});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("'bad'"), std::string::npos);
  }
}

}  // namespace
}  // namespace graphcal
