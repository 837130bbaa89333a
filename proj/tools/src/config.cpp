#include "graphcal/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <openssl/evp.h>

#include "graphcal/errors.hpp"

namespace graphcal::pipeline {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

struct Field {
  std::function<void(PipelineConfig&, const std::string& key, const std::string& value)> set;
  // nullopt: key omitted from the canonical form (unset optional).
  std::function<std::optional<std::string>(const PipelineConfig&)> get;
};

#define GC_NUMBER(member, T)                                                                \
  Field {                                                                                    \
    [](PipelineConfig& c, const std::string& k, const std::string& v) {                     \
      c.member = parse_number<T>(k, v);                                                      \
    },                                                                                       \
        [](const PipelineConfig& c) -> std::optional<std::string> {                          \
          if constexpr (std::is_floating_point_v<T>) return format_double(c.member);         \
          else return std::to_string(c.member);                                              \
        }                                                                                    \
  }

#define GC_BOOL(member)                                                                          \
  Field {                                                                                         \
    [](PipelineConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); }, \
        [](const PipelineConfig& c) -> std::optional<std::string> {                               \
          return c.member ? "true" : "false";                                                     \
        }                                                                                         \
  }

#define GC_OPTIONAL_STRING(member)                                                                   \
  Field {                                                                                             \
    [](PipelineConfig& c, const std::string&, const std::string& v) {                                \
      if (v.empty()) c.member.reset();                                                                \
      else c.member = v;                                                                              \
    },                                                                                                \
        [](const PipelineConfig& c) -> std::optional<std::string> {                                   \
          if (!c.member) return std::nullopt;                                                         \
          return std::string(*c.member);                                                              \
        }                                                                                             \
  }

#define GC_ENUM(member, parse)                                                                  \
  Field {                                                                                        \
    [](PipelineConfig& c, const std::string&, const std::string& v) { c.member = parse(v); },  \
        [](const PipelineConfig& c) -> std::optional<std::string> {                              \
          return std::string(to_string(c.member));                                               \
        }                                                                                        \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"run.seed", GC_NUMBER(seed, std::uint64_t)},
      {"run.jobs", GC_NUMBER(jobs, std::size_t)},
      {"run.out_dir",
       {[](PipelineConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
        [](const PipelineConfig& c) -> std::optional<std::string> { return c.out_dir.string(); }}},
      {"run.dataset", GC_OPTIONAL_STRING(dataset)},

      {"synth.questions", GC_NUMBER(synth.num_questions, std::size_t)},
      {"synth.n", GC_NUMBER(synth.n_per_question, std::size_t)},
      {"synth.distortion", GC_ENUM(synth.distortion, parse_distortion)},
      {"synth.seed", GC_NUMBER(synth.seed, std::uint64_t)},
      {"synth.dimension", GC_NUMBER(synth.dimension, std::size_t)},
      {"synth.noise_sigma", GC_NUMBER(synth.noise_sigma, double)},

      {"ingest.mode", GC_ENUM(embedding.mode, parse_embedding_mode)},
      {"ingest.endpoint", GC_OPTIONAL_STRING(embedding.endpoint_url)},
      {"ingest.dimension", GC_NUMBER(embedding.dimension, std::size_t)},
      {"ingest.batch_size", GC_NUMBER(embedding.batch_size, std::size_t)},
      {"ingest.seed", GC_NUMBER(embedding.seed, std::uint64_t)},

      {"label.enabled", GC_BOOL(label_enabled)},
      {"label.method", GC_ENUM(labeler.method, parse_label_method)},
      {"label.tau", GC_NUMBER(labeler.tau, double)},
      {"label.judge_endpoint", GC_OPTIONAL_STRING(labeler.judge_endpoint)},
      {"label.judge_reasks", GC_NUMBER(labeler.judge_reasks, int)},
      {"label.overwrite", GC_BOOL(labeler.overwrite)},
      {"label.manual_file", GC_OPTIONAL_STRING(manual_labels)},

      {"graph.edge_weights", GC_ENUM(graph.edge_weights, parse_edge_weight_mode)},
      {"graph.k_max", GC_NUMBER(graph.k_max, std::size_t)},
      {"graph.seed", GC_NUMBER(graph.seed, std::uint64_t)},
      {"graph.split_ratio", GC_NUMBER(graph.split_ratio, double)},

      {"split.seed", GC_NUMBER(split.seed, std::uint64_t)},
      {"split.val_fraction", GC_NUMBER(split.val_fraction, double)},
      {"split.test_fraction", GC_NUMBER(split.test_fraction, double)},

      {"train.learning_rate", GC_NUMBER(train.learning_rate, double)},
      {"train.beta1", GC_NUMBER(train.beta1, double)},
      {"train.beta2", GC_NUMBER(train.beta2, double)},
      {"train.epsilon", GC_NUMBER(train.epsilon, double)},
      {"train.plateau_factor", GC_NUMBER(train.plateau_factor, double)},
      {"train.plateau_patience", GC_NUMBER(train.plateau_patience, std::size_t)},
      {"train.min_learning_rate", GC_NUMBER(train.min_learning_rate, double)},
      {"train.batch_size", GC_NUMBER(train.batch_size, std::size_t)},
      {"train.max_epochs", GC_NUMBER(train.max_epochs, std::size_t)},
      {"train.early_stop_patience", GC_NUMBER(train.early_stop_patience, std::size_t)},
      {"train.model_seed", GC_NUMBER(train.model_seed, std::uint64_t)},
      {"train.hidden",
       {[](PipelineConfig& c, const std::string& k, const std::string& v) {
          const auto parts = split_list(v);
          if (parts.size() != 3) throw ConfigError("config key '" + k + "': expected three sizes");
          for (std::size_t i = 0; i < 3; ++i) c.train.dims.hidden[i] = parse_number<std::size_t>(k, parts[i]);
        },
        [](const PipelineConfig& c) -> std::optional<std::string> {
          const auto& h = c.train.dims.hidden;
          return std::to_string(h[0]) + "," + std::to_string(h[1]) + "," + std::to_string(h[2]);
        }}},

      {"evaluate.method", GC_ENUM(evaluate.method, parse_score_method)},
      {"evaluate.posthoc", GC_ENUM(evaluate.posthoc, parse_posthoc_method)},
      {"evaluate.bins", GC_NUMBER(evaluate.bins, std::size_t)},
      {"evaluate.per_response", GC_BOOL(evaluate.per_response)},

      {"repeat.runs", GC_NUMBER(repeat.runs, std::size_t)},
      {"repeat.rows",
       {[](PipelineConfig& c, const std::string&, const std::string& v) {
          c.repeat.rows.clear();
          for (const auto& item : split_list(v)) c.repeat.rows.push_back(parse_method_spec(item));
        },
        [](const PipelineConfig& c) -> std::optional<std::string> {
          std::vector<std::string> names;
          for (const auto& r : c.repeat.rows) names.push_back(to_string(r));
          return join(names);
        }}},
  };
  return table;
}

#undef GC_NUMBER
#undef GC_BOOL
#undef GC_OPTIONAL_STRING
#undef GC_ENUM

const char* const kSeedKeys[] = {"synth.seed", "ingest.seed", "graph.seed", "split.seed", "train.model_seed"};

}  // namespace

ScoreMethod parse_score_method(std::string_view name) {
  if (name == "gnn") return ScoreMethod::gnn;
  if (name == "cluster-freq") return ScoreMethod::cluster_freq;
  if (name == "seqlik") return ScoreMethod::seqlik;
  if (name == "degree") return ScoreMethod::degree;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected gnn, cluster-freq, seqlik or degree)");
}

const char* to_string(ScoreMethod method) noexcept {
  switch (method) {
    case ScoreMethod::gnn: return "gnn";
    case ScoreMethod::cluster_freq: return "cluster-freq";
    case ScoreMethod::seqlik: return "seqlik";
    case ScoreMethod::degree: return "degree";
  }
  return "?";
}

MethodSpec parse_method_spec(std::string_view text) {
  MethodSpec spec;
  const auto plus = text.find('+');
  spec.method = parse_score_method(trim(text.substr(0, plus)));
  if (plus != std::string_view::npos) spec.posthoc = parse_posthoc_method(trim(text.substr(plus + 1)));
  return spec;
}

std::string to_string(const MethodSpec& spec) {
  std::string out = to_string(spec.method);
  if (spec.posthoc != PosthocMethod::none) out += std::string("+") + to_string(spec.posthoc);
  return out;
}

void PipelineConfig::validate() const {
  if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
  if (synth.num_questions < 1) throw ConfigError("synth.questions must be >= 1");
  if (synth.n_per_question < 2) throw ConfigError("synth.n must be >= 2");
  if (synth.dimension < 2) throw ConfigError("synth.dimension must be >= 2");
  embedding.validate();
  labeler.validate();
  if (graph.k_max < 1) throw ConfigError("graph.k_max must be >= 1");
  if (!(graph.split_ratio > 0.0 && graph.split_ratio <= 1.0)) {
    throw ConfigError("graph.split_ratio must be in (0, 1]");
  }
  if (!(split.val_fraction > 0.0 && split.test_fraction > 0.0 &&
        split.val_fraction + split.test_fraction < 1.0)) {
    throw ConfigError("split fractions must be positive and sum to less than 1");
  }
  train.validate();
  if (evaluate.bins < 1) throw ConfigError("evaluate.bins must be >= 1");
  if (repeat.runs < 2) throw ConfigError("repeat.runs must be >= 2 (a std needs two runs)");
  if (repeat.rows.empty()) throw ConfigError("repeat.rows must name at least one method");
}

Tree read_ini_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

Tree parse_ini(const std::string& text) {
  Tree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

void apply_assignment(Tree& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form section.key=value");
  }
  const auto key = trim(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos) {
    throw ConfigError("override key '" + key + "' must be section.key");
  }
  tree.put(Tree::path_type(key, '.'), trim(assignment.substr(eq + 1)));
}

PipelineConfig config_from_tree(const Tree& tree) {
  PipelineConfig config;
  config.repeat.rows = {parse_method_spec("cluster-freq"), parse_method_spec("cluster-freq+platt"),
                        parse_method_spec("cluster-freq+isotonic"), parse_method_spec("seqlik"),
                        parse_method_spec("seqlik+platt"), parse_method_spec("seqlik+isotonic"),
                        parse_method_spec("degree"), parse_method_spec("degree+platt"),
                        parse_method_spec("degree+isotonic"), parse_method_spec("gnn")};

  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("config entry '" + section + "' is outside any section");
    }
    for (const auto& [key, leaf] : body) {
      if (!leaf.empty()) throw ConfigError("config key '" + section + "." + key + "' is nested too deeply");
      values[section + "." + key] = trim(leaf.data());
    }
  }
  for (const auto& [key, value] : values) {
    if (!fields().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  if (auto it = values.find("run.seed"); it != values.end()) fields().at("run.seed").set(config, it->first, it->second);
  for (const char* key : kSeedKeys) fields().at(key).set(config, key, std::to_string(config.seed));
  config.train.split_seed = config.seed;
  for (const auto& [key, value] : values) {
    if (key != "run.seed") fields().at(key).set(config, key, value);
  }
  config.train.split_seed = config.split.seed;
  config.validate();
  return config;
}

std::string canonical_ini(const PipelineConfig& config) {
  std::map<std::string, std::map<std::string, std::string>> sections;
  for (const auto& [key, field] : fields()) {
    if (auto v = field.get(config)) {
      const auto dot = key.find('.');
      sections[key.substr(0, dot)][key.substr(dot + 1)] = *v;
    }
  }
  std::string out;
  for (const auto& [section, keys] : sections) {
    if (!out.empty()) out += "\n";
    out += "[" + section + "]\n";
    for (const auto& [key, value] : keys) out += key + " = " + value + "\n";
  }
  return out;
}

std::string config_hash(const PipelineConfig& config) { return sha256_hex(canonical_ini(config)); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::config, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace graphcal::pipeline
