#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evida/evidence_bank.hpp"

namespace evida {

struct TextEmbedding {
  std::vector<double> values;
};

// Cosine similarity in [-1,1]. DomainError on dimension mismatch or a zero
// vector (similarity undefined).
double cosine(const TextEmbedding& a, const TextEmbedding& b);

// Retrieval text of an item: question text, newline, instruction (if any).
std::string item_text(const SurveyItem& item);

class EncoderClient {
 public:
  virtual ~EncoderClient() = default;

  // Stable identity string, part of the embedding cache key.
  virtual std::string identity() const = 0;

  // One embedding per input text, constant dimension, deterministic for
  // identical input within a session.
  virtual std::vector<TextEmbedding> embed(const std::vector<std::string>& texts) = 0;
};

// Deterministic offline encoder: hashed bag of word tokens (hashing trick),
// L2-normalized. Token overlap shows up as cosine similarity, so retrieval
// is meaningful in tests without any network service. Stable across
// platforms by construction (pure uint64 arithmetic).
class HashingEncoder : public EncoderClient {
 public:
  explicit HashingEncoder(std::uint64_t seed = 0, std::size_t dimension = 256);

  std::string identity() const override;
  std::vector<TextEmbedding> embed(const std::vector<std::string>& texts) override;

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

struct HttpEncoderConfig {
  std::string base_url;              // e.g. http://host:8080
  std::string path = "/embed";
  std::string model;                 // optional, forwarded when non-empty
  std::string api_key_env = "EVIDA_ENCODER_API_KEY";
  int timeout_seconds = 30;
  int max_attempts = 3;              // exponential backoff between attempts
};

// POST {"texts":[...]} -> {"embeddings":[[...],...]}.
class HttpEncoderClient : public EncoderClient {
 public:
  explicit HttpEncoderClient(HttpEncoderConfig config);

  std::string identity() const override;
  std::vector<TextEmbedding> embed(const std::vector<std::string>& texts) override;

 private:
  HttpEncoderConfig config_;
};

// Content-addressed embedding cache: one JSON file per (encoder identity,
// text) under the cache directory. Files store the text and are verified on
// read, so a hash collision degrades to a miss.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path directory);

  std::optional<TextEmbedding> lookup(const std::string& encoder_identity,
                                      const std::string& text) const;
  void store(const std::string& encoder_identity, const std::string& text,
             const TextEmbedding& embedding) const;

 private:
  std::filesystem::path directory_;
};

// Wraps an encoder with a persistent cache; misses go to the inner encoder.
class CachingEncoder : public EncoderClient {
 public:
  CachingEncoder(std::shared_ptr<EncoderClient> inner, std::filesystem::path cache_directory);

  std::string identity() const override;
  std::vector<TextEmbedding> embed(const std::vector<std::string>& texts) override;

 private:
  std::shared_ptr<EncoderClient> inner_;
  EmbeddingCache cache_;
  mutable std::mutex mutex_;
};

struct EncodeOptions {
  int batch_size = 64;
  int max_in_flight = 1;  // parallel batches during index/bulk embedding
};

// Embeds texts in batches, at most max_in_flight batches concurrently,
// preserving input order.
std::vector<TextEmbedding> embed_all(EncoderClient& encoder,
                                     const std::vector<std::string>& texts,
                                     const EncodeOptions& options = {});

struct RetrievalQuery {
  std::string question_text;
  std::optional<std::string> instruction;
  GroupKey group;
  int k = 10;
  std::int64_t n_min = 30;
  std::set<std::string> exclude_item_ids;
};

struct RetrievedEntry {
  std::string item_id;
  double score = 0.0;
  ItemEvidence evidence;
};

struct RetrievedEvidence {
  std::vector<RetrievedEntry> entries;  // nonincreasing score order
};

// Scores every non-excluded item of the query's group by cosine similarity,
// keeps the top-k (ties broken by ascending item_id), then drops entries
// with support below n_min. Filtering happens after truncation, so the
// result may have fewer than k entries even when more supported items exist
// below the cut. DomainError when the group is absent from the bank.
RetrievedEvidence retrieve(const RetrievalQuery& query, const EvidenceBank& bank,
                           EncoderClient& encoder, const EncodeOptions& options = {});

}  // namespace evida
