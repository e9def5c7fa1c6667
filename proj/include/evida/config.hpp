#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "evida/llm.hpp"
#include "evida/rewards.hpp"

namespace evida {

// Every knob of the pipeline with its default. Paper-stated values are the
// defaults: thresholds (0.33, 0.67), retrieval k = 10, reward weights
// (0.25, 0.45, 0.15, 0.15), group size 16. Resolution precedence is
// flag > config file > environment > default.
struct PipelineConfig {
  // Paths
  std::string cache_dir;

  // Encoder backend
  std::string encoder_base_url;
  std::string encoder_model;
  int encoder_timeout_s = 30;

  // LLM backend
  std::string llm_base_url;
  std::string llm_model;
  int llm_timeout_s = 120;
  DecodingParams decoding;

  // Discretization
  double tau1 = 0.33;
  double tau2 = 0.67;

  // Retrieval
  int k = 10;
  std::int64_t n_min = 30;

  // Inference
  double stage_b_tolerance = 0.01;
  int retries = 2;
  int max_in_flight = 1;
  int batch_size = 64;

  // Rewards / episodes
  RewardWeights weights;
  int group_size = 16;
  std::uint64_t seed = 0;

  // Ablations
  bool no_evidence = false;
  bool no_welzel = false;

  // Offline mocks (scripted fixture optional; otherwise synthetic)
  bool mock = false;
  std::string mock_fixture;

  DiscretizationThresholds thresholds() const { return {tau1, tau2}; }
};

// Applies EVIDA_* environment variables, then the optional JSON config file.
// CLI flags are applied afterwards by the caller, completing the precedence
// chain. Secrets (API keys) are never part of the file; clients read them
// from the environment directly.
PipelineConfig load_config(const std::optional<std::filesystem::path>& config_file);

}  // namespace evida
