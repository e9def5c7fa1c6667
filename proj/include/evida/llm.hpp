#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evida {

struct DecodingParams {
  double temperature = 0.0;
  std::optional<int> top_k;
  std::optional<double> top_p;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

struct Completion {
  std::string text;
  // First-token log-probabilities (token -> logprob), when requested and
  // supported by the backend.
  std::optional<std::map<std::string, double>> first_token_logprobs;
};

class LLMClient {
 public:
  virtual ~LLMClient() = default;

  virtual std::string identity() const = 0;
  virtual bool supports_logprobs() const = 0;
  virtual Completion complete(const std::string& prompt, const DecodingParams& decoding,
                              bool want_logprobs = false) = 0;
};

struct HttpChatConfig {
  std::string base_url;  // e.g. http://host:1234/v1
  std::string model;
  std::string path = "/chat/completions";
  std::string api_key_env = "EVIDA_LLM_API_KEY";
  int timeout_seconds = 120;
  int max_attempts = 3;
};

// Chat-completions-compatible HTTP backend.
class HttpChatClient : public LLMClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);

  std::string identity() const override;
  bool supports_logprobs() const override { return true; }
  Completion complete(const std::string& prompt, const DecodingParams& decoding,
                      bool want_logprobs = false) override;

 private:
  HttpChatConfig config_;
};

// Replays canned completions from a fixture file, cycling through the list.
// Fixture: {"responses": ["text", {"text": "...", "logprobs": {"A": -0.2}}, ...]}.
class ScriptedLLMClient : public LLMClient {
 public:
  explicit ScriptedLLMClient(const std::filesystem::path& fixture_path);
  explicit ScriptedLLMClient(std::vector<Completion> responses);

  std::string identity() const override { return "scripted-llm"; }
  bool supports_logprobs() const override;
  Completion complete(const std::string& prompt, const DecodingParams& decoding,
                      bool want_logprobs = false) override;

  std::size_t calls() const { return next_.load(); }

 private:
  std::vector<Completion> responses_;
  std::atomic<std::size_t> next_{0};
};

// Deterministic offline model emulator. Recognizes the pipeline's prompt
// markers and answers with schema-valid JSON; distribution answers lean on
// the observed distributions embedded in the prompt's reference block, the
// way a competent model is instructed to. Variation across calls comes from
// a seeded counter, so sequential runs are reproducible.
class SyntheticLLMClient : public LLMClient {
 public:
  explicit SyntheticLLMClient(std::uint64_t seed = 0, double jitter = 0.05);

  std::string identity() const override;
  bool supports_logprobs() const override { return true; }
  Completion complete(const std::string& prompt, const DecodingParams& decoding,
                      bool want_logprobs = false) override;

  // The evidence-averaged distribution the emulator would answer with,
  // before jitter. Exposed for tests.
  static std::map<std::string, double> evidence_distribution(const std::string& prompt);

 private:
  std::uint64_t seed_;
  double jitter_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace evida
