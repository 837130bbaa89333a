#include "graphcal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"

namespace graphcal {

Distortion parse_distortion(std::string_view name) {
  if (name == "identity") return Distortion::identity;
  if (name == "square") return Distortion::square;
  if (name == "sqrt") return Distortion::sqrt;
  throw ConfigError("unknown distortion '" + std::string(name) + "'");
}

const char* to_string(Distortion d) noexcept {
  switch (d) {
    case Distortion::identity: return "identity";
    case Distortion::square: return "square";
    case Distortion::sqrt: return "sqrt";
  }
  return "?";
}

double apply_distortion(Distortion d, double x) {
  switch (d) {
    case Distortion::identity: return x;
    case Distortion::square: return x * x;
    case Distortion::sqrt: return std::sqrt(x);
  }
  return x;
}

namespace {

Eigen::VectorXd random_unit(Rng& rng, std::size_t dim) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  } while (v.norm() == 0.0);
  return v.normalized();
}

// Unit vector orthogonal to every column already in `basis`.
Eigen::VectorXd orthogonal_unit(Rng& rng, const std::vector<Eigen::VectorXd>& basis, std::size_t dim) {
  for (;;) {
    Eigen::VectorXd v = random_unit(rng, dim);
    for (const auto& b : basis) v -= v.dot(b) * b;
    if (v.norm() > 1e-6) return v.normalized();
  }
}

const char* const kWords[] = {"amber", "basil", "cedar", "delta", "ember", "fjord", "garnet", "harbor",
                              "indigo", "juniper", "kelp", "lumen", "marble", "nectar", "onyx", "pewter",
                              "quartz", "russet", "saffron", "tundra", "umber", "velvet", "willow", "xenon",
                              "yarrow", "zephyr"};

std::string answer_text(Rng& rng) {
  constexpr std::size_t kCount = sizeof(kWords) / sizeof(kWords[0]);
  std::string text = "the answer is";
  for (int w = 0; w < 2; ++w) {
    text += ' ';
    text += kWords[rng.below(kCount)];
  }
  return text;
}

}  // namespace

SyntheticDataset generate(const SyntheticOptions& o) {
  if (o.n_per_question < 2) throw ConfigError("n_per_question must be >= 2");
  if (o.dimension < 4) throw ConfigError("synthetic dimension must be >= 4");
  if (!(o.min_share > 0.0 && o.min_share <= o.max_share && o.max_share <= 1.0)) {
    throw ConfigError("dominant share range must satisfy 0 < min <= max <= 1");
  }

  SyntheticDataset out;
  out.records.reserve(o.num_questions);
  out.truths.reserve(o.num_questions);
  const std::size_t n = o.n_per_question;

  for (std::size_t q = 0; q < o.num_questions; ++q) {
    Rng rng(derive_seed(o.seed, q));
    const double x = rng.uniform(o.min_share, o.max_share);
    const std::size_t m = std::min(n, static_cast<std::size_t>(std::ceil(x * static_cast<double>(n) - 1e-12)));
    const std::size_t rest = n - m;

    // Cluster sizes: the correct center first, then 1-2 wrong centers.
    std::vector<std::size_t> sizes{m};
    if (rest == 1) {
      sizes.push_back(1);
    } else if (rest > 1) {
      if (rng.below(2) == 0) {
        sizes.push_back(rest);
      } else {
        const std::size_t first = 1 + static_cast<std::size_t>(rng.below(rest - 1));
        sizes.push_back(first);
        sizes.push_back(rest - first);
      }
    }

    const Eigen::VectorXd correct = random_unit(rng, o.dimension);
    std::vector<Eigen::VectorXd> centers{correct};
    std::vector<Eigen::VectorXd> basis{correct};
    for (std::size_t c = 1; c < sizes.size(); ++c) {
      // cos(correct, wrong) = a; wrong centers use orthogonal directions, so
      // their mutual cosine is a_1 * a_2 <= max^2.
      const double a = rng.uniform(o.min_center_cosine, o.max_center_cosine);
      const Eigen::VectorXd u = orthogonal_unit(rng, basis, o.dimension);
      basis.push_back(u);
      centers.push_back(a * correct + std::sqrt(1.0 - a * a) * u);
    }

    std::vector<std::string> texts;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      std::string t;
      do {
        t = answer_text(rng);
      } while (std::find(texts.begin(), texts.end(), t) != texts.end());
      texts.push_back(std::move(t));
    }

    QuestionRecord record;
    record.id = "q" + std::to_string(q);
    record.question = "synthetic question " + std::to_string(q);
    record.reference_answer = texts[0];

    QuestionTruth truth;
    truth.id = record.id;
    truth.dominant_share = x;
    truth.dominant_size = m;

    const double p_correct = apply_distortion(o.distortion, x);
    const double p_wrong = apply_distortion(o.distortion, o.wrong_share_scale * x);

    std::size_t primary = 0;
    double primary_sim = -2.0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      for (std::size_t k = 0; k < sizes[c]; ++k) {
        Eigen::VectorXd e = centers[c];
        for (Eigen::Index d = 0; d < e.size(); ++d) e(d) += o.noise_sigma * rng.normal();
        e.normalize();
        const double p = c == 0 ? p_correct : p_wrong;

        ResponseRecord r;
        r.text = texts[c];
        r.embedding = std::vector<double>(e.data(), e.data() + e.size());
        r.label = rng.bernoulli(p) ? 1 : 0;
        if (c == 0) {
          const double sim = e.dot(correct);
          if (sim > primary_sim) {
            primary_sim = sim;
            primary = record.responses.size();
          }
        }
        record.responses.push_back(std::move(r));
        truth.true_probability.push_back(p);
        truth.planted_cluster.push_back(static_cast<int>(c));
      }
    }
    for (std::size_t i = 0; i < record.responses.size(); ++i) record.responses[i].is_primary = (i == primary);

    out.records.push_back(std::move(record));
    out.truths.push_back(std::move(truth));
  }
  return out;
}

void write_truths(std::span<const QuestionTruth> truths, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write truths '" + path.string() + "'");
  for (const auto& t : truths) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["dominant_share"] = t.dominant_share;
    j["dominant_size"] = t.dominant_size;
    j["true_probability"] = t.true_probability;
    j["planted_cluster"] = t.planted_cluster;
    out << j.dump() << '\n';
  }
}

std::vector<QuestionTruth> read_truths(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open truths '" + path.string() + "'");
  std::vector<QuestionTruth> truths;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QuestionTruth t;
      t.id = j.at("id").get<std::string>();
      t.dominant_share = j.at("dominant_share").get<double>();
      t.dominant_size = j.at("dominant_size").get<std::size_t>();
      t.true_probability = j.at("true_probability").get<std::vector<double>>();
      t.planted_cluster = j.at("planted_cluster").get<std::vector<int>>();
      truths.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_number, "", e.what());
    }
  }
  return truths;
}

OracleReport oracle_ece_of_baseline(std::span<const QuestionRecord> records,
                                    std::span<const QuestionTruth> truths,
                                    std::span<const std::vector<double>> confidences, bool primary_only,
                                    std::size_t bins) {
  if (records.size() != truths.size() || records.size() != confidences.size()) {
    throw DomainError("oracle: records, truths and confidences differ in length");
  }
  std::vector<ScoredLabel> pairs;
  double gap = 0.0;
  for (std::size_t q = 0; q < records.size(); ++q) {
    const auto& rec = records[q];
    const auto& truth = truths[q];
    if (truth.id != rec.id) throw DomainError("oracle: truth ids do not line up with records");
    if (confidences[q].size() != rec.responses.size() || truth.true_probability.size() != rec.responses.size()) {
      throw DomainError("oracle: per-response lengths differ for '" + rec.id + "'");
    }
    for (std::size_t i = 0; i < rec.responses.size(); ++i) {
      if (primary_only && !rec.responses[i].is_primary.value_or(false)) continue;
      if (!rec.responses[i].label) throw DataError("oracle: unlabeled response in '" + rec.id + "'");
      pairs.push_back({confidences[q][i], *rec.responses[i].label});
      gap += std::abs(confidences[q][i] - truth.true_probability[i]);
    }
  }
  OracleReport report;
  report.count = pairs.size();
  report.ece = ece(pairs, bins).value;
  report.expected_gap = pairs.empty() ? 0.0 : gap / static_cast<double>(pairs.size());
  return report;
}

}  // namespace graphcal
