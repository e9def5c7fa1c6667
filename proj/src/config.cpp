#include "evida/config.hpp"

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/util.hpp"

namespace evida {

namespace {

void apply_environment(PipelineConfig& config) {
  config.encoder_base_url = getenv_or("EVIDA_ENCODER_BASE_URL", config.encoder_base_url);
  config.encoder_model = getenv_or("EVIDA_ENCODER_MODEL", config.encoder_model);
  config.llm_base_url = getenv_or("EVIDA_LLM_BASE_URL", config.llm_base_url);
  config.llm_model = getenv_or("EVIDA_LLM_MODEL", config.llm_model);
  config.cache_dir = getenv_or("EVIDA_CACHE_DIR", config.cache_dir);
}

template <typename T>
void read_field(const nlohmann::json& body, const char* key, T& target) {
  if (body.contains(key)) target = body.at(key).get<T>();
}

void apply_file(PipelineConfig& config, const std::filesystem::path& path) {
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw InputError("malformed config file " + path.string() + ": " + ex.what());
  }
  if (!body.is_object()) {
    throw InputError("config file must hold a JSON object: " + path.string());
  }

  read_field(body, "cache_dir", config.cache_dir);
  read_field(body, "encoder_base_url", config.encoder_base_url);
  read_field(body, "encoder_model", config.encoder_model);
  read_field(body, "encoder_timeout_s", config.encoder_timeout_s);
  read_field(body, "llm_base_url", config.llm_base_url);
  read_field(body, "llm_model", config.llm_model);
  read_field(body, "llm_timeout_s", config.llm_timeout_s);
  read_field(body, "tau1", config.tau1);
  read_field(body, "tau2", config.tau2);
  read_field(body, "k", config.k);
  read_field(body, "n_min", config.n_min);
  read_field(body, "stage_b_tolerance", config.stage_b_tolerance);
  read_field(body, "retries", config.retries);
  read_field(body, "max_in_flight", config.max_in_flight);
  read_field(body, "batch_size", config.batch_size);
  read_field(body, "group_size", config.group_size);
  read_field(body, "seed", config.seed);

  if (body.contains("decoding")) {
    const auto& decoding = body["decoding"];
    read_field(decoding, "temperature", config.decoding.temperature);
    read_field(decoding, "max_tokens", config.decoding.max_tokens);
    if (decoding.contains("top_p")) config.decoding.top_p = decoding["top_p"].get<double>();
    if (decoding.contains("top_k")) config.decoding.top_k = decoding["top_k"].get<int>();
    if (decoding.contains("seed")) {
      config.decoding.seed = decoding["seed"].get<std::uint64_t>();
    }
  }
  if (body.contains("reward_weights")) {
    const auto& weights = body["reward_weights"];
    read_field(weights, "lmh", config.weights.lmh);
    read_field(weights, "dist", config.weights.dist);
    read_field(weights, "schema_a", config.weights.schema_a);
    read_field(weights, "schema_b", config.weights.schema_b);
  }
}

}  // namespace

PipelineConfig load_config(const std::optional<std::filesystem::path>& config_file) {
  PipelineConfig config;
  apply_environment(config);
  if (config_file) {
    apply_file(config, *config_file);
  }
  return config;
}

}  // namespace evida
