#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evida/inference.hpp"

namespace evida {

struct RewardWeights {
  double lmh = 0.25;
  double dist = 0.45;
  double schema_a = 0.15;
  double schema_b = 0.15;

  void validate() const;  // all >= 0, at least one > 0
};

struct RewardBreakdown {
  double r_lmh = 0.0;        // in [0,1]
  double r_dist = 0.0;       // in [0,1]
  int r_schema_a = 0;        // 0 or 1
  int r_schema_b = 0;        // 0 or 1
  double total = 0.0;        // exact weighted sum
  std::optional<std::string> lmh_failure;  // reason when r_lmh was forced to 0
};

// Average per-dimension exact match over the gold-covered options: options
// without a gold signature (zero bank support) are excluded from numerator
// and denominator. DomainError when a gold option has no prediction or the
// gold set is empty; callers record that as reward 0 with the reason.
double reward_lmh(const std::map<std::string, LMHSignature>& predicted,
                  const std::map<std::string, LMHSignature>& gold);

// Base-2 Jensen-Shannon divergence over the union of keys, missing keys as
// zero mass and 0*log 0 = 0. Both inputs must sum to 1 within 1e-9
// (DomainError otherwise). Bounded in [0,1]; 1 exactly for disjoint point
// masses.
double jsd(const AnswerDistribution& p, const AnswerDistribution& q);

// 1 - jsd(predicted, gold).
double reward_dist(const AnswerDistribution& predicted, const AnswerDistribution& gold);

// 1 iff the report is valid; parse failures arrive as all-failed reports.
int reward_schema(const ValidationReport& report);

double combine(const RewardWeights& weights, double r_lmh, double r_dist, int r_schema_a,
               int r_schema_b);

// A training episode built from the bank: a held-out bank item treated as an
// unseen question, with bank-derived gold supervision.
struct Episode {
  SurveyItem target_item;
  GroupKey group;
  std::optional<LMHSignature> group_profile;
  RetrievedEvidence evidence;  // target item excluded
  AnswerDistribution gold_distribution;
  std::map<std::string, LMHSignature> gold_signatures;  // options with support > 0
};

struct EpisodeRetrievalConfig {
  int k = 10;
  std::int64_t n_min = 30;
  EncodeOptions encode;
};

// DomainError (skip reason) when the pair is absent or support < n_min.
Episode build_episode(const EvidenceBank& bank, const GroupKey& group,
                      const std::string& item_id, const EpisodeRetrievalConfig& config,
                      EncoderClient& encoder);

struct ScoredRollout {
  PredictionResult rollout;
  RewardBreakdown breakdown;
};

// Scores one rollout against the episode's gold supervision. Invalid Stage B
// yields r_dist = 0; an unusable Stage A yields r_lmh = 0 with the reason
// recorded.
RewardBreakdown score_rollout(const Episode& episode, const PredictionResult& rollout,
                              const RewardWeights& weights);

struct GroupAdvantages {
  std::vector<double> rewards;
  std::vector<double> advantages;  // mean 0; population std 1 unless degenerate
};

// (r_i - mean) / population std; all zeros when the std is below 1e-12.
// DomainError when fewer than two rewards.
GroupAdvantages group_advantages(const std::vector<double>& rewards);

struct EpisodeRollouts {
  Episode episode;
  std::vector<ScoredRollout> rollouts;  // exactly the group size
  GroupAdvantages advantages;
};

// Optimizer settings exported as passthrough metadata for the external
// trainer; the artifact itself performs no gradient updates.
struct TrainerMetadata {
  double clip_epsilon = 0.2;
  double kl_coefficient = 0.04;
  double learning_rate = 1e-6;
  int batch_size = 32;
  int epochs = 1;
};

// JSON-lines batch: one header record (weights, group size, thresholds,
// seed, trainer metadata) followed by one record per rollout. Refuses
// episodes whose rollout count differs from group_size (InputError).
void export_training_batch(const std::vector<EpisodeRollouts>& episodes,
                           const RewardWeights& weights, int group_size,
                           const DiscretizationThresholds& thresholds, std::uint64_t seed,
                           const std::filesystem::path& path,
                           const TrainerMetadata& trainer = {});

}  // namespace evida
