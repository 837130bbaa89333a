#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "graphcal/baselines.hpp"
#include "graphcal/dataset.hpp"
#include "graphcal/errors.hpp"
#include "graphcal/graph.hpp"
#include "graphcal/synthetic.hpp"

namespace graphcal {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Distortion, Values) {
  EXPECT_EQ(apply_distortion(Distortion::square, 0.5), 0.25);
  EXPECT_EQ(apply_distortion(Distortion::sqrt, 0.25), 0.5);
  EXPECT_EQ(apply_distortion(Distortion::identity, 0.3), 0.3);
  EXPECT_EQ(parse_distortion("sqrt"), Distortion::sqrt);
  EXPECT_THROW(parse_distortion("cube"), ConfigError);
}

TEST(Generate, ValidLabeledRecordsWithOnePrimary) {
  SyntheticOptions o;
  o.num_questions = 50;
  const auto data = generate(o);
  ASSERT_EQ(data.records.size(), 50u);
  EXPECT_TRUE(validate_dataset(data.records).empty());
  for (std::size_t q = 0; q < data.records.size(); ++q) {
    const auto& r = data.records[q];
    const auto& t = data.truths[q];
    ASSERT_EQ(r.responses.size(), 30u);
    EXPECT_EQ(t.id, r.id);
    EXPECT_EQ(t.dominant_size, static_cast<std::size_t>(std::ceil(t.dominant_share * 30)));
    EXPECT_GE(t.dominant_share, o.min_share);
    EXPECT_LE(t.dominant_share, o.max_share);
    std::size_t primaries = 0, dominant = 0;
    for (std::size_t i = 0; i < r.responses.size(); ++i) {
      const auto& resp = r.responses[i];
      ASSERT_TRUE(resp.label && resp.embedding && resp.is_primary);
      EXPECT_EQ(resp.embedding->size(), o.dimension);
      if (*resp.is_primary) {
        ++primaries;
        EXPECT_EQ(t.planted_cluster[i], 0);
      }
      if (t.planted_cluster[i] == 0) {
        ++dominant;
        EXPECT_EQ(t.true_probability[i], t.dominant_share);  // identity distortion
        EXPECT_EQ(resp.text, *r.reference_answer);
      } else {
        EXPECT_NEAR(t.true_probability[i], o.wrong_share_scale * t.dominant_share, 1e-15);
      }
    }
    EXPECT_EQ(primaries, 1u);
    EXPECT_EQ(dominant, t.dominant_size);
  }
}

TEST(Generate, BytesAreDeterministicAndPrefixStable) {
  SyntheticOptions o;
  o.num_questions = 20;
  o.seed = 5;
  const auto dir = fs::temp_directory_path() / "graphcal_synthetic_test";
  fs::create_directories(dir);
  write_dataset(generate(o).records, dir / "a.jsonl");
  write_dataset(generate(o).records, dir / "b.jsonl");
  write_truths(generate(o).truths, dir / "a.truths");
  write_truths(generate(o).truths, dir / "b.truths");
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_EQ(slurp(dir / "a.truths"), slurp(dir / "b.truths"));
  EXPECT_EQ(read_truths(dir / "a.truths"), generate(o).truths);

  auto big = o;
  big.num_questions = 40;
  const auto larger = generate(big);
  const auto smaller = generate(o);
  for (std::size_t q = 0; q < 20; ++q) EXPECT_EQ(larger.records[q], smaller.records[q]);

  auto other = o;
  other.seed = 6;
  EXPECT_NE(generate(other).records[0], smaller.records[0]);
}

TEST(Generate, WrongCentersStayWithinCosineBand) {
  SyntheticOptions o;
  o.num_questions = 40;
  o.noise_sigma = 0.0;
  const auto data = generate(o);
  for (std::size_t q = 0; q < data.records.size(); ++q) {
    const auto& r = data.records[q];
    const auto& t = data.truths[q];
    std::size_t correct = 0;
    while (t.planted_cluster[correct] != 0) ++correct;
    for (std::size_t i = 0; i < r.responses.size(); ++i) {
      if (t.planted_cluster[i] == 0) continue;
      const double c = cosine_similarity(*r.responses[i].embedding, *r.responses[correct].embedding);
      ASSERT_GE(c, o.min_center_cosine - 1e-12);
      ASSERT_LE(c, o.max_center_cosine + 1e-12);
    }
  }
}

// Within each share decile, the empirical accuracy of dominant-cluster
// responses tracks the distorted share.
TEST(Generate, DecileAccuracyFollowsDistortion) {
  SyntheticOptions o;
  o.num_questions = 5000;
  o.n_per_question = 10;
  o.distortion = Distortion::square;
  o.seed = 3;
  const auto data = generate(o);
  std::vector<double> correct(10, 0), total(10, 0), expected(10, 0);
  for (std::size_t q = 0; q < data.records.size(); ++q) {
    const auto& t = data.truths[q];
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(t.dominant_share * 10));
    for (std::size_t i = 0; i < t.planted_cluster.size(); ++i) {
      if (t.planted_cluster[i] != 0) continue;
      correct[bin] += *data.records[q].responses[i].label;
      expected[bin] += t.true_probability[i];
      total[bin] += 1;
    }
  }
  for (std::size_t b = 2; b < 10; ++b) {
    ASSERT_GT(total[b], 500) << "decile " << b;
    const double p = expected[b] / total[b];
    // Responses share a question, so allow a generous multiple of the iid error.
    EXPECT_NEAR(correct[b] / total[b], p, 6 * std::sqrt(p * (1 - p) / total[b]) + 0.01) << "decile " << b;
  }
}

TEST(Oracle, TrueProbabilitiesAreCalibrated) {
  SyntheticOptions o;
  o.num_questions = 3000;
  o.distortion = Distortion::square;
  o.seed = 11;
  const auto data = generate(o);
  std::vector<std::vector<double>> truth_conf, freq_conf;
  for (std::size_t q = 0; q < data.records.size(); ++q) {
    truth_conf.push_back(data.truths[q].true_probability);
    freq_conf.push_back(cluster_frequency_confidence(build_graph(data.records[q])));
  }
  const auto perfect = oracle_ece_of_baseline(data.records, data.truths, truth_conf, false);
  EXPECT_EQ(perfect.expected_gap, 0.0);
  EXPECT_LT(perfect.ece, 0.02);
  // Raw cluster frequency ignores the distortion and is far off.
  const auto freq = oracle_ece_of_baseline(data.records, data.truths, freq_conf, true);
  EXPECT_EQ(freq.count, 3000u);
  EXPECT_GT(freq.ece, 0.15);
  EXPECT_GT(freq.expected_gap, 0.15);
}

TEST(Oracle, RejectsMisalignedInput) {
  SyntheticOptions o;
  o.num_questions = 2;
  const auto data = generate(o);
  std::vector<std::vector<double>> conf(1);
  EXPECT_THROW(oracle_ece_of_baseline(data.records, data.truths, conf), DomainError);
}

}  // namespace
}  // namespace graphcal
