#include "evida/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/http_support.hpp"
#include "evida/util.hpp"

namespace evida {

double cosine(const TextEmbedding& a, const TextEmbedding& b) {
  if (a.values.size() != b.values.size() || a.values.empty()) {
    throw DomainError("cosine requires equal nonzero dimensions");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    norm_a += a.values[i] * a.values[i];
    norm_b += b.values[i] * b.values[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw DomainError("cosine undefined for zero vector");
  }
  const double score = dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
  return std::clamp(score, -1.0, 1.0);
}

std::string item_text(const SurveyItem& item) {
  if (item.instruction && !item.instruction->empty()) {
    return item.question_text + "\n" + *item.instruction;
  }
  return item.question_text;
}

// --- HashingEncoder ----------------------------------------------------

HashingEncoder::HashingEncoder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension_ == 0) throw DomainError("encoder dimension must be positive");
}

std::string HashingEncoder::identity() const {
  return "hashing-encoder/seed=" + std::to_string(seed_) +
         "/dim=" + std::to_string(dimension_);
}

std::vector<TextEmbedding> HashingEncoder::embed(const std::vector<std::string>& texts) {
  std::vector<TextEmbedding> embeddings;
  embeddings.reserve(texts.size());
  for (const std::string& text : texts) {
    TextEmbedding embedding;
    embedding.values.assign(dimension_, 0.0);
    for (const std::string& token : tokenize_words(text)) {
      const std::uint64_t hash = fnv1a64(token, fnv1a64("enc") ^ seed_);
      const std::size_t slot = static_cast<std::size_t>(hash % dimension_);
      const double sign = (hash >> 63) != 0 ? -1.0 : 1.0;
      embedding.values[slot] += sign;
    }
    double norm = 0.0;
    for (double v : embedding.values) norm += v * v;
    if (norm == 0.0) {
      embedding.values[0] = 1.0;  // keep cosine defined for token-free text
    } else {
      norm = std::sqrt(norm);
      for (double& v : embedding.values) v /= norm;
    }
    embeddings.push_back(std::move(embedding));
  }
  return embeddings;
}

// --- HttpEncoderClient -------------------------------------------------

HttpEncoderClient::HttpEncoderClient(HttpEncoderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw InputError("encoder base URL not configured");
  }
}

std::string HttpEncoderClient::identity() const {
  return "http-encoder/" + config_.base_url +
         (config_.model.empty() ? "" : "/" + config_.model);
}

std::vector<TextEmbedding> HttpEncoderClient::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  nlohmann::json body;
  body["texts"] = texts;
  if (!config_.model.empty()) body["model"] = config_.model;

  HttpRequestSpec spec;
  spec.base_url = config_.base_url;
  spec.path = config_.path;
  spec.body = body.dump();
  spec.bearer_token = getenv_or(config_.api_key_env, "");
  spec.timeout_seconds = config_.timeout_seconds;
  spec.max_attempts = config_.max_attempts;

  const std::string response = post_json_with_retries(spec);
  try {
    const nlohmann::json payload = nlohmann::json::parse(response);
    const auto& rows = payload.at("embeddings");
    if (rows.size() != texts.size()) {
      throw TransportError("encoder returned " + std::to_string(rows.size()) +
                           " embeddings for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<TextEmbedding> embeddings;
    embeddings.reserve(rows.size());
    std::size_t dimension = 0;
    for (const auto& row : rows) {
      TextEmbedding embedding;
      embedding.values.reserve(row.size());
      for (const auto& value : row) embedding.values.push_back(value.get<double>());
      if (dimension == 0) dimension = embedding.values.size();
      if (embedding.values.empty() || embedding.values.size() != dimension) {
        throw TransportError("encoder returned inconsistent embedding dimensions");
      }
      embeddings.push_back(std::move(embedding));
    }
    return embeddings;
  } catch (const nlohmann::json::exception& ex) {
    throw TransportError(std::string("invalid encoder response: ") + ex.what());
  }
}

// --- EmbeddingCache ----------------------------------------------------

EmbeddingCache::EmbeddingCache(std::filesystem::path directory)
    : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
}

namespace {

std::filesystem::path cache_path(const std::filesystem::path& directory,
                                 const std::string& encoder_identity,
                                 const std::string& text) {
  const std::uint64_t key = fnv1a64(text, fnv1a64(encoder_identity));
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.json", static_cast<unsigned long long>(key));
  return directory / name;
}

}  // namespace

std::optional<TextEmbedding> EmbeddingCache::lookup(const std::string& encoder_identity,
                                                    const std::string& text) const {
  const auto path = cache_path(directory_, encoder_identity, text);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const nlohmann::json entry = nlohmann::json::parse(read_file(path));
    if (entry.at("encoder").get<std::string>() != encoder_identity ||
        entry.at("text").get<std::string>() != text) {
      return std::nullopt;  // hash collision, treat as miss
    }
    TextEmbedding embedding;
    for (const auto& value : entry.at("embedding")) {
      embedding.values.push_back(value.get<double>());
    }
    return embedding;
  } catch (...) {
    return std::nullopt;  // unreadable cache entries are misses, never fatal
  }
}

void EmbeddingCache::store(const std::string& encoder_identity, const std::string& text,
                           const TextEmbedding& embedding) const {
  nlohmann::ordered_json entry;
  entry["encoder"] = encoder_identity;
  entry["text"] = text;
  entry["embedding"] = embedding.values;
  write_file(cache_path(directory_, encoder_identity, text), entry.dump());
}

// --- CachingEncoder ----------------------------------------------------

CachingEncoder::CachingEncoder(std::shared_ptr<EncoderClient> inner,
                               std::filesystem::path cache_directory)
    : inner_(std::move(inner)), cache_(std::move(cache_directory)) {}

std::string CachingEncoder::identity() const { return inner_->identity(); }

std::vector<TextEmbedding> CachingEncoder::embed(const std::vector<std::string>& texts) {
  const std::string id = inner_->identity();
  std::vector<TextEmbedding> result(texts.size());
  std::vector<std::size_t> missing;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (auto hit = cache_.lookup(id, texts[i])) {
        result[i] = std::move(*hit);
      } else {
        missing.push_back(i);
      }
    }
  }
  if (!missing.empty()) {
    std::vector<std::string> pending;
    pending.reserve(missing.size());
    for (std::size_t index : missing) pending.push_back(texts[index]);
    const std::vector<TextEmbedding> fresh = inner_->embed(pending);
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t j = 0; j < missing.size(); ++j) {
      cache_.store(id, pending[j], fresh[j]);
      result[missing[j]] = fresh[j];
    }
  }
  return result;
}

// --- Bulk embedding ----------------------------------------------------

std::vector<TextEmbedding> embed_all(EncoderClient& encoder,
                                     const std::vector<std::string>& texts,
                                     const EncodeOptions& options) {
  if (texts.empty()) return {};
  const std::size_t batch_size =
      options.batch_size > 0 ? static_cast<std::size_t>(options.batch_size) : 64;
  const std::size_t batches = (texts.size() + batch_size - 1) / batch_size;

  std::vector<std::vector<TextEmbedding>> per_batch(batches);
  std::vector<std::exception_ptr> failures(batches);

  auto run_batch = [&](std::size_t batch) {
    const std::size_t begin = batch * batch_size;
    const std::size_t end = std::min(texts.size(), begin + batch_size);
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    try {
      per_batch[batch] = encoder.embed(chunk);
      if (per_batch[batch].size() != chunk.size()) {
        throw TransportError("encoder returned wrong embedding count");
      }
    } catch (...) {
      failures[batch] = std::current_exception();
    }
  };

  const std::size_t fan_out =
      std::max<std::size_t>(1, static_cast<std::size_t>(options.max_in_flight));
  if (fan_out <= 1 || batches <= 1) {
    for (std::size_t batch = 0; batch < batches; ++batch) run_batch(batch);
  } else {
    std::size_t next = 0;
    while (next < batches) {
      const std::size_t window = std::min(fan_out, batches - next);
      std::vector<std::thread> workers;
      workers.reserve(window);
      for (std::size_t i = 0; i < window; ++i) {
        workers.emplace_back(run_batch, next + i);
      }
      for (std::thread& worker : workers) worker.join();
      next += window;
    }
  }

  std::vector<TextEmbedding> result;
  result.reserve(texts.size());
  for (std::size_t batch = 0; batch < batches; ++batch) {
    if (failures[batch]) std::rethrow_exception(failures[batch]);
    for (TextEmbedding& embedding : per_batch[batch]) {
      result.push_back(std::move(embedding));
    }
  }
  return result;
}

// --- Retrieval ---------------------------------------------------------

RetrievedEvidence retrieve(const RetrievalQuery& query, const EvidenceBank& bank,
                           EncoderClient& encoder, const EncodeOptions& options) {
  if (query.k < 1) throw DomainError("retrieval k must be >= 1");
  const GroupEvidence* group = bank.find_group(query.group);
  if (group == nullptr) {
    throw DomainError("group '" + query.group.label() + "' not present in bank");
  }

  RetrievedEvidence result;
  if (group->items.empty()) {
    std::cerr << "warning: group '" << query.group.label()
              << "' has no evidence items, retrieval is empty\n";
    return result;
  }

  std::vector<const ItemEvidence*> candidates;
  std::vector<std::string> texts;
  SurveyItem query_item;
  query_item.question_text = query.question_text;
  query_item.instruction = query.instruction;
  texts.push_back(item_text(query_item));
  for (const auto& [item_id, evidence] : group->items) {
    if (query.exclude_item_ids.count(item_id) > 0) continue;
    candidates.push_back(&evidence);
    texts.push_back(item_text(evidence.item));
  }
  if (candidates.empty()) {
    return result;
  }

  const std::vector<TextEmbedding> embeddings = embed_all(encoder, texts, options);
  const TextEmbedding& query_embedding = embeddings.front();

  struct Scored {
    double score;
    const ItemEvidence* evidence;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scored.push_back({cosine(query_embedding, embeddings[i + 1]), candidates[i]});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.evidence->item.item_id < b.evidence->item.item_id;
  });

  // Truncate to top-k first; the support filter never promotes lower-ranked
  // items into the window.
  const std::size_t cut = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(query.k));
  for (std::size_t i = 0; i < cut; ++i) {
    if (scored[i].evidence->support < query.n_min) continue;
    result.entries.push_back({scored[i].evidence->item.item_id, scored[i].score,
                              *scored[i].evidence});
  }
  return result;
}

}  // namespace evida
