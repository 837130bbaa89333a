#include "graphcal/embedding.hpp"

#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "graphcal/errors.hpp"
#include "graphcal/random.hpp"
#include "graphcal/text.hpp"

namespace graphcal {

EmbeddingMode parse_embedding_mode(std::string_view name) {
  if (name == "precomputed") return EmbeddingMode::precomputed;
  if (name == "service") return EmbeddingMode::service;
  if (name == "hash") return EmbeddingMode::hash;
  throw ConfigError("unknown embedding mode '" + std::string(name) + "'");
}

const char* to_string(EmbeddingMode mode) noexcept {
  switch (mode) {
    case EmbeddingMode::precomputed: return "precomputed";
    case EmbeddingMode::service: return "service";
    case EmbeddingMode::hash: return "hash";
  }
  return "?";
}

void EmbeddingProviderConfig::validate() const {
  if (mode == EmbeddingMode::service && (!endpoint_url || endpoint_url->empty())) {
    throw ConfigError("service embedding mode requires endpoint_url");
  }
  if (mode == EmbeddingMode::hash && dimension < 2) {
    throw ConfigError("hash embedding dimension must be >= 2");
  }
  if (batch_size < 1) throw ConfigError("embedding batch_size must be >= 1");
}

std::vector<double> hash_embed(std::string_view text, std::size_t dimension, std::uint64_t seed) {
  if (dimension < 2) throw DomainError("hash_embed: dimension must be >= 2");
  std::vector<double> v(dimension, 0.0);

  const auto tokens = tokenize(text);
  const std::uint64_t salt = splitmix64(seed);
  const auto add = [&](std::string_view feature) {
    const std::uint64_t h = splitmix64(fnv1a64(feature) ^ salt);
    const std::size_t bucket = static_cast<std::size_t>(h % dimension);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + ' ' + tokens[i + 1]);
  }

  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<std::vector<double>> HashEmbedder::embed(std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dimension_, seed_));
  return out;
}

EmbeddingServiceClient::EmbeddingServiceClient(std::string endpoint_url,
                                               std::optional<std::string> api_key,
                                               RetryPolicy retry)
    : endpoint_url_(std::move(endpoint_url)), api_key_(std::move(api_key)), retry_(retry) {}

std::vector<std::vector<double>> EmbeddingServiceClient::embed(std::span<const std::string> texts) {
  nlohmann::json request;
  request["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const std::string body = post_json(endpoint_url_, request.dump(), api_key_, retry_);

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(body);
    auto vectors = reply.at("embeddings").get<std::vector<std::vector<double>>>();
    if (vectors.size() != texts.size()) {
      throw TransportError("embedding service returned " + std::to_string(vectors.size()) +
                               " vectors for " + std::to_string(texts.size()) + " texts",
                           false);
    }
    return vectors;
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed embedding service reply: ") + e.what(), false);
  }
}

std::unique_ptr<TextEmbedder> make_embedder(const EmbeddingProviderConfig& config) {
  config.validate();
  switch (config.mode) {
    case EmbeddingMode::hash:
      return std::make_unique<HashEmbedder>(config.dimension, config.seed);
    case EmbeddingMode::service:
      return std::make_unique<EmbeddingServiceClient>(
          *config.endpoint_url,
          config.api_key ? config.api_key : env_value("EMBEDDING_API_KEY"), config.retry);
    case EmbeddingMode::precomputed:
      return nullptr;
  }
  return nullptr;
}

namespace {

std::optional<std::size_t> existing_dimension(const std::vector<QuestionRecord>& records) {
  for (const auto& q : records)
    for (const auto& r : q.responses)
      if (r.embedding) return r.embedding->size();
  return std::nullopt;
}

}  // namespace

std::vector<QuestionRecord> embed_dataset(std::vector<QuestionRecord> records,
                                          TextEmbedder& embedder, std::size_t batch_size) {
  if (batch_size < 1) throw ConfigError("embedding batch_size must be >= 1");

  // Distinct missing texts, in first-appearance order.
  std::vector<std::string> pending;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& q : records)
    for (const auto& r : q.responses)
      if (!r.embedding && slot.emplace(r.text, pending.size()).second) pending.push_back(r.text);
  if (pending.empty()) return records;

  std::optional<std::size_t> dim = existing_dimension(records);
  std::vector<std::vector<double>> vectors;
  vectors.reserve(pending.size());
  for (std::size_t start = 0; start < pending.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, pending.size() - start);
    auto batch = embedder.embed(std::span<const std::string>(pending).subspan(start, count));
    if (batch.size() != count) {
      throw TransportError("embedder returned " + std::to_string(batch.size()) + " vectors for " +
                               std::to_string(count) + " texts",
                           false);
    }
    for (auto& v : batch) {
      if (v.empty()) throw ConfigError("embedder returned an empty vector");
      if (!dim) dim = v.size();
      if (v.size() != *dim) {
        throw ConfigError("embedding dimension mismatch: got " + std::to_string(v.size()) +
                          ", dataset uses " + std::to_string(*dim));
      }
      vectors.push_back(std::move(v));
    }
  }

  for (auto& q : records)
    for (auto& r : q.responses)
      if (!r.embedding) r.embedding = vectors[slot.at(r.text)];
  return records;
}

std::vector<QuestionRecord> embed_dataset(std::vector<QuestionRecord> records,
                                          const EmbeddingProviderConfig& config) {
  config.validate();
  if (config.mode == EmbeddingMode::precomputed) {
    for (const auto& q : records)
      for (std::size_t i = 0; i < q.responses.size(); ++i)
        if (!q.responses[i].embedding) {
          throw DataError("question '" + q.id + "' responses[" + std::to_string(i) +
                          "] has no embedding (precomputed mode)");
        }
    return records;
  }
  auto embedder = make_embedder(config);
  return embed_dataset(std::move(records), *embedder, config.batch_size);
}

}  // namespace graphcal
