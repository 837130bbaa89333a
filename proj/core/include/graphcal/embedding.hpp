#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphcal/http.hpp"
#include "graphcal/types.hpp"

namespace graphcal {

enum class EmbeddingMode { precomputed, service, hash };

EmbeddingMode parse_embedding_mode(std::string_view name);
const char* to_string(EmbeddingMode mode) noexcept;

struct EmbeddingProviderConfig {
  EmbeddingMode mode = EmbeddingMode::precomputed;
  std::optional<std::string> endpoint_url;
  std::size_t dimension = 64;  // hash mode
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;  // hash mode
  RetryPolicy retry;
  std::optional<std::string> api_key;  // defaults to EMBEDDING_API_KEY

  void validate() const;
};

/// Deterministic offline embedder: signed hashing of unigrams and bigrams
/// into `dimension` buckets, then L2 normalization. Texts without tokens map
/// to e_1.
std::vector<double> hash_embed(std::string_view text, std::size_t dimension, std::uint64_t seed);

/// Maps a batch of texts to vectors, one per text, in order.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> texts) = 0;
};

class HashEmbedder final : public TextEmbedder {
 public:
  HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {}
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// Client for {"texts": [...]} -> {"embeddings": [[...], ...]}.
class EmbeddingServiceClient final : public TextEmbedder {
 public:
  EmbeddingServiceClient(std::string endpoint_url, std::optional<std::string> api_key,
                         RetryPolicy retry);
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override;

 private:
  std::string endpoint_url_;
  std::optional<std::string> api_key_;
  RetryPolicy retry_;
};

std::unique_ptr<TextEmbedder> make_embedder(const EmbeddingProviderConfig& config);

/// Fills every missing embedding. Existing embeddings are kept as-is; texts
/// are requested in batches of `config.batch_size`, each distinct text once.
std::vector<QuestionRecord> embed_dataset(std::vector<QuestionRecord> records,
                                          const EmbeddingProviderConfig& config);

/// Same, with a caller-supplied embedder (tests, custom backends).
std::vector<QuestionRecord> embed_dataset(std::vector<QuestionRecord> records,
                                          TextEmbedder& embedder, std::size_t batch_size);

}  // namespace graphcal
