#include "evida/llm.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/http_support.hpp"
#include "evida/json_extract.hpp"
#include "evida/prompts.hpp"
#include "evida/util.hpp"

namespace evida {

using ordered_json = nlohmann::ordered_json;

// --- HttpChatClient ----------------------------------------------------

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw InputError("LLM base URL not configured");
  }
}

std::string HttpChatClient::identity() const {
  return "chat/" + config_.base_url + "/" + config_.model;
}

Completion HttpChatClient::complete(const std::string& prompt, const DecodingParams& decoding,
                                    bool want_logprobs) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = decoding.temperature;
  body["max_tokens"] = decoding.max_tokens;
  if (decoding.top_p) body["top_p"] = *decoding.top_p;
  if (decoding.top_k) body["top_k"] = *decoding.top_k;
  if (decoding.seed) body["seed"] = *decoding.seed;
  if (want_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = 20;
  }

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
    const auto& choice = payload.at("choices").at(0);
    Completion completion;
    completion.text = choice.at("message").at("content").get<std::string>();
    if (want_logprobs && choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      const auto& content = choice["logprobs"].at("content");
      if (!content.empty()) {
        std::map<std::string, double> logprobs;
        const auto& first = content.at(0);
        if (first.contains("token")) {
          logprobs[first["token"].get<std::string>()] = first.value("logprob", 0.0);
        }
        if (first.contains("top_logprobs")) {
          for (const auto& entry : first["top_logprobs"]) {
            const std::string token = entry.at("token").get<std::string>();
            const double logprob = entry.at("logprob").get<double>();
            auto it = logprobs.find(token);
            if (it == logprobs.end() || it->second < logprob) logprobs[token] = logprob;
          }
        }
        completion.first_token_logprobs = std::move(logprobs);
      }
    }
    return completion;
  } catch (const nlohmann::json::exception& ex) {
    throw TransportError(std::string("invalid chat completion response: ") + ex.what());
  }
}

// --- ScriptedLLMClient -------------------------------------------------

namespace {

Completion completion_from_json(const nlohmann::json& entry) {
  Completion completion;
  if (entry.is_string()) {
    completion.text = entry.get<std::string>();
    return completion;
  }
  completion.text = entry.at("text").get<std::string>();
  if (entry.contains("logprobs")) {
    std::map<std::string, double> logprobs;
    for (const auto& [token, value] : entry["logprobs"].items()) {
      logprobs[token] = value.get<double>();
    }
    completion.first_token_logprobs = std::move(logprobs);
  }
  return completion;
}

}  // namespace

ScriptedLLMClient::ScriptedLLMClient(const std::filesystem::path& fixture_path) {
  nlohmann::json fixture;
  try {
    fixture = nlohmann::json::parse(read_file(fixture_path));
    for (const auto& entry : fixture.at("responses")) {
      responses_.push_back(completion_from_json(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError("malformed LLM fixture " + fixture_path.string() + ": " + ex.what());
  }
  if (responses_.empty()) {
    throw InputError("LLM fixture has no responses: " + fixture_path.string());
  }
}

ScriptedLLMClient::ScriptedLLMClient(std::vector<Completion> responses)
    : responses_(std::move(responses)) {
  if (responses_.empty()) {
    throw InputError("scripted LLM needs at least one response");
  }
}

bool ScriptedLLMClient::supports_logprobs() const {
  return std::any_of(responses_.begin(), responses_.end(),
                     [](const Completion& c) { return c.first_token_logprobs.has_value(); });
}

Completion ScriptedLLMClient::complete(const std::string&, const DecodingParams&,
                                       bool want_logprobs) {
  const std::size_t index = next_.fetch_add(1) % responses_.size();
  Completion completion = responses_[index];
  if (!want_logprobs) completion.first_token_logprobs.reset();
  return completion;
}

// --- SyntheticLLMClient ------------------------------------------------

namespace {

std::vector<std::string> parse_prompt_options(const std::string& prompt) {
  const auto raw = extract_json_after(prompt, kAnswerOptionsMarker, '{');
  std::vector<std::string> ids;
  if (!raw) return ids;
  const ordered_json options = ordered_json::parse(*raw);
  for (const auto& [id, text] : options.items()) ids.push_back(id);
  return ids;
}

// Count of "X. text" option lines in the lettered baseline prompts.
std::size_t parse_letter_count(const std::string& prompt) {
  std::size_t count = 0;
  std::size_t pos = prompt.find("\nOptions:\n");
  if (pos == std::string::npos) return 0;
  pos += 10;
  while (pos + 2 < prompt.size() && prompt[pos] >= 'A' && prompt[pos] <= 'Z' &&
         prompt[pos + 1] == '.' && prompt[pos + 2] == ' ') {
    ++count;
    const std::size_t eol = prompt.find('\n', pos);
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return count;
}

double hash_unit(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t state = a ^ (b * 0x9e3779b97f4a7c15ull) ^ (c * 0xd1b54a32d192ed03ull);
  return splitmix_unit(state);
}

}  // namespace

SyntheticLLMClient::SyntheticLLMClient(std::uint64_t seed, double jitter)
    : seed_(seed), jitter_(jitter) {}

std::string SyntheticLLMClient::identity() const {
  return "synthetic-llm/seed=" + std::to_string(seed_);
}

std::map<std::string, double> SyntheticLLMClient::evidence_distribution(
    const std::string& prompt) {
  const std::vector<std::string> options = parse_prompt_options(prompt);
  std::map<std::string, double> result;
  if (options.empty()) return result;

  // Positional average of the observed distributions in the reference
  // block. The label arrays of the group-profile line also start with '[',
  // so candidates are scanned until an array of reference objects turns up.
  std::vector<double> positional(options.size(), 0.0);
  bool any = false;
  const std::size_t anchor = prompt.find(kReferenceQuestionsMarker);
  if (anchor != std::string::npos) {
    std::size_t search = anchor + kReferenceQuestionsMarker.size();
    while (true) {
      std::size_t next = search;
      const auto raw = extract_json_from(prompt, search, '[', &next);
      if (!raw) break;
      search = next;
      const ordered_json references = ordered_json::parse(*raw);
      if (!references.empty() && !references.front().is_object()) continue;
      for (const auto& reference : references) {
        if (!reference.contains("observed_distribution_over_labels")) continue;
        std::size_t position = 0;
        for (const auto& [id, value] :
             reference["observed_distribution_over_labels"].items()) {
          if (position >= positional.size()) break;
          positional[position] += value.get<double>();
          ++position;
          any = true;
        }
      }
      break;
    }
  }

  double total = 0.0;
  for (double value : positional) total += value;
  for (std::size_t i = 0; i < options.size(); ++i) {
    result[options[i]] =
        (any && total > 0.0) ? positional[i] / total : 1.0 / static_cast<double>(options.size());
  }
  return result;
}

Completion SyntheticLLMClient::complete(const std::string& prompt, const DecodingParams&,
                                        bool want_logprobs) {
  const std::uint64_t call = calls_.fetch_add(1);
  Completion completion;

  if (prompt.find(kStageATaskMarker) != std::string::npos) {
    const std::vector<std::string> options = parse_prompt_options(prompt);
    ordered_json output;
    ordered_json order = ordered_json::array();
    for (std::string_view name : kSubIndexNames) order.push_back(std::string(name));
    output["subindex_order"] = order;
    ordered_json profiles = ordered_json::array();
    for (const std::string& option : options) {
      ordered_json labels = ordered_json::array();
      for (std::size_t dim = 0; dim < kSubIndexCount; ++dim) {
        const double u = hash_unit(seed_ ^ call, fnv1a64(option), dim);
        labels.push_back(u < 1.0 / 3 ? "low" : (u < 2.0 / 3 ? "medium" : "high"));
      }
      profiles.push_back({{"option", option}, {"subindex_LMH", labels}});
    }
    output["option_profiles"] = profiles;
    output["notes"] = "synthetic value profile";
    completion.text = output.dump();
    return completion;
  }

  if (prompt.find(kDistributionTaskMarker) != std::string::npos) {
    std::map<std::string, double> distribution = evidence_distribution(prompt);
    if (!distribution.empty() && jitter_ > 0.0) {
      double total = 0.0;
      std::size_t index = 0;
      for (auto& [id, probability] : distribution) {
        const double u = hash_unit(seed_, call, index++);
        probability = std::max(0.0, probability * (1.0 + jitter_ * (2.0 * u - 1.0)));
        total += probability;
      }
      if (total > 0.0) {
        for (auto& [id, probability] : distribution) probability /= total;
      }
    }
    ordered_json payload = ordered_json::object();
    for (const auto& [id, probability] : distribution) payload[id] = probability;
    ordered_json output;
    output["predicted_distribution"] = payload;
    output["rationale"] = "evidence-weighted synthetic estimate";
    completion.text = output.dump();
    return completion;
  }

  const bool letter_choice = prompt.find(kLetterChoiceMarker) != std::string::npos;
  const bool single_choice = prompt.find(kSingleChoiceMarker) != std::string::npos;
  if (letter_choice || single_choice) {
    const std::size_t count = std::max<std::size_t>(parse_letter_count(prompt), 1);
    const std::uint64_t prompt_hash = fnv1a64(prompt);
    std::vector<double> weights(count);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      weights[i] = 0.25 + hash_unit(seed_, prompt_hash, i);
      total += weights[i];
    }
    for (double& w : weights) w /= total;

    if (letter_choice) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < count; ++i) {
        if (weights[i] > weights[best]) best = i;
      }
      completion.text = std::string(1, static_cast<char>('A' + best));
      if (want_logprobs) {
        std::map<std::string, double> logprobs;
        for (std::size_t i = 0; i < count; ++i) {
          logprobs[std::string(1, static_cast<char>('A' + i))] = std::log(weights[i]);
        }
        completion.first_token_logprobs = std::move(logprobs);
      }
      return completion;
    }

    // Single-choice sampling: the call counter makes repeated prompts vary.
    const double draw = hash_unit(seed_ ^ 0xabcdefull, prompt_hash, call);
    double cumulative = 0.0;
    std::size_t chosen = count - 1;
    for (std::size_t i = 0; i < count; ++i) {
      cumulative += weights[i];
      if (draw < cumulative) {
        chosen = i;
        break;
      }
    }
    completion.text = std::string(1, static_cast<char>('A' + chosen));
    return completion;
  }

  completion.text = "OK";
  return completion;
}

}  // namespace evida
