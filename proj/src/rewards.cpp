#include "evida/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/util.hpp"

namespace evida {

using ordered_json = nlohmann::ordered_json;

void RewardWeights::validate() const {
  if (lmh < 0.0 || dist < 0.0 || schema_a < 0.0 || schema_b < 0.0) {
    throw DomainError("reward weights must be nonnegative");
  }
  if (lmh == 0.0 && dist == 0.0 && schema_a == 0.0 && schema_b == 0.0) {
    throw DomainError("at least one reward weight must be positive");
  }
}

double reward_lmh(const std::map<std::string, LMHSignature>& predicted,
                  const std::map<std::string, LMHSignature>& gold) {
  if (gold.empty()) {
    throw DomainError("no gold signatures to score against");
  }
  std::size_t matches = 0;
  for (const auto& [option, gold_signature] : gold) {
    auto it = predicted.find(option);
    if (it == predicted.end()) {
      throw DomainError("prediction missing gold option '" + option + "'");
    }
    for (std::size_t dim = 0; dim < kSubIndexCount; ++dim) {
      if (it->second.labels[dim] == gold_signature.labels[dim]) ++matches;
    }
  }
  return static_cast<double>(matches) /
         (static_cast<double>(gold.size()) * static_cast<double>(kSubIndexCount));
}

double jsd(const AnswerDistribution& p, const AnswerDistribution& q) {
  const double sum_p = distribution_sum(p);
  const double sum_q = distribution_sum(q);
  if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9) {
    throw DomainError("jsd requires normalized distributions");
  }
  std::set<std::string> keys;
  for (const auto& [key, value] : p) keys.insert(key);
  for (const auto& [key, value] : q) keys.insert(key);

  double divergence = 0.0;
  for (const std::string& key : keys) {
    const auto ip = p.find(key);
    const auto iq = q.find(key);
    const double pv = ip == p.end() ? 0.0 : ip->second;
    const double qv = iq == q.end() ? 0.0 : iq->second;
    if (pv < 0.0 || qv < 0.0) {
      throw DomainError("jsd requires nonnegative mass");
    }
    const double mv = 0.5 * (pv + qv);
    if (pv > 0.0) divergence += 0.5 * pv * std::log2(pv / mv);
    if (qv > 0.0) divergence += 0.5 * qv * std::log2(qv / mv);
  }
  return std::clamp(divergence, 0.0, 1.0);
}

double reward_dist(const AnswerDistribution& predicted, const AnswerDistribution& gold) {
  return 1.0 - jsd(predicted, gold);
}

int reward_schema(const ValidationReport& report) { return report.valid ? 1 : 0; }

double combine(const RewardWeights& weights, double r_lmh, double r_dist, int r_schema_a,
               int r_schema_b) {
  return weights.lmh * r_lmh + weights.dist * r_dist +
         weights.schema_a * static_cast<double>(r_schema_a) +
         weights.schema_b * static_cast<double>(r_schema_b);
}

Episode build_episode(const EvidenceBank& bank, const GroupKey& group,
                      const std::string& item_id, const EpisodeRetrievalConfig& config,
                      EncoderClient& encoder) {
  const ItemEvidence* target = bank.find_item(group, item_id);
  if (target == nullptr) {
    throw DomainError("no evidence for (" + group.label() + ", " + item_id + ")");
  }
  if (target->support < config.n_min) {
    throw DomainError("insufficient support for (" + group.label() + ", " + item_id +
                      "): " + std::to_string(target->support) + " < " +
                      std::to_string(config.n_min));
  }

  Episode episode;
  episode.target_item = target->item;
  episode.group = group;
  episode.group_profile = bank.find_group(group)->group_profile;
  episode.gold_distribution = target->distribution;
  for (const auto& [option, evidence] : target->option_evidence) {
    if (evidence.signature) {
      episode.gold_signatures[option] = *evidence.signature;
    }
  }

  RetrievalQuery query;
  query.question_text = target->item.question_text;
  query.instruction = target->item.instruction;
  query.group = group;
  query.k = config.k;
  query.n_min = config.n_min;
  query.exclude_item_ids.insert(item_id);
  episode.evidence = retrieve(query, bank, encoder, config.encode);
  return episode;
}

RewardBreakdown score_rollout(const Episode& episode, const PredictionResult& rollout,
                              const RewardWeights& weights) {
  weights.validate();
  RewardBreakdown breakdown;

  if (rollout.stage_a && rollout.stage_a->report.valid && rollout.stage_a->output) {
    std::map<std::string, LMHSignature> predicted;
    bool convertible = true;
    for (const auto& [option, labels] :
         extract_signatures(*rollout.stage_a->output, episode.target_item)) {
      try {
        predicted[option] = LMHSignature::from_strings(labels);
      } catch (const Error&) {
        convertible = false;
        break;
      }
    }
    if (convertible) {
      try {
        breakdown.r_lmh = reward_lmh(predicted, episode.gold_signatures);
      } catch (const Error& ex) {
        breakdown.r_lmh = 0.0;
        breakdown.lmh_failure = ex.what();
      }
    } else {
      breakdown.lmh_failure = "predicted signature not convertible";
    }
  } else {
    breakdown.lmh_failure = "stage A output invalid or absent";
  }

  // Invalid Stage B means no distribution to compare; the schema reward
  // carries the penalty and r_dist stays 0.
  if (rollout.normalized_distribution) {
    breakdown.r_dist = reward_dist(*rollout.normalized_distribution, episode.gold_distribution);
  }

  breakdown.r_schema_a =
      rollout.stage_a ? reward_schema(rollout.stage_a->report) : 0;
  breakdown.r_schema_b = reward_schema(rollout.stage_b.report);
  breakdown.total = combine(weights, breakdown.r_lmh, breakdown.r_dist, breakdown.r_schema_a,
                            breakdown.r_schema_b);
  return breakdown;
}

GroupAdvantages group_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2) {
    throw DomainError("group advantages need at least 2 rewards");
  }
  const double count = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double reward : rewards) mean += reward;
  mean /= count;

  double variance = 0.0;
  for (double reward : rewards) variance += (reward - mean) * (reward - mean);
  variance /= count;  // population variance
  const double std_dev = std::sqrt(variance);

  GroupAdvantages result;
  result.rewards = rewards;
  result.advantages.resize(rewards.size(), 0.0);
  if (std_dev >= 1e-12) {
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      result.advantages[i] = (rewards[i] - mean) / std_dev;
    }
  }
  return result;
}

namespace {

ordered_json distribution_to_json(const AnswerDistribution& distribution) {
  ordered_json out = ordered_json::object();
  for (const auto& [option, probability] : distribution) out[option] = probability;
  return out;
}

ordered_json breakdown_to_json(const RewardBreakdown& breakdown) {
  ordered_json out;
  out["r_lmh"] = breakdown.r_lmh;
  out["r_dist"] = breakdown.r_dist;
  out["r_schema_a"] = breakdown.r_schema_a;
  out["r_schema_b"] = breakdown.r_schema_b;
  out["total"] = breakdown.total;
  if (breakdown.lmh_failure) out["lmh_failure"] = *breakdown.lmh_failure;
  return out;
}

}  // namespace

void export_training_batch(const std::vector<EpisodeRollouts>& episodes,
                           const RewardWeights& weights, int group_size,
                           const DiscretizationThresholds& thresholds, std::uint64_t seed,
                           const std::filesystem::path& path, const TrainerMetadata& trainer) {
  weights.validate();
  for (const EpisodeRollouts& episode : episodes) {
    if (static_cast<int>(episode.rollouts.size()) != group_size) {
      throw InputError("incomplete rollout group for item '" +
                       episode.episode.target_item.item_id + "': " +
                       std::to_string(episode.rollouts.size()) + " of " +
                       std::to_string(group_size));
    }
  }

  std::string content;
  {
    ordered_json header;
    header["record"] = "header";
    header["group_size"] = group_size;
    header["reward_weights"] = {{"lmh", weights.lmh},
                                {"dist", weights.dist},
                                {"schema_a", weights.schema_a},
                                {"schema_b", weights.schema_b}};
    header["thresholds"] = {{"tau1", thresholds.tau1}, {"tau2", thresholds.tau2}};
    header["seed"] = seed;
    // External-trainer settings, recorded for reproducibility only.
    header["optimizer"] = {{"clip_epsilon", trainer.clip_epsilon},
                           {"kl_coefficient", trainer.kl_coefficient},
                           {"learning_rate", trainer.learning_rate},
                           {"batch_size", trainer.batch_size},
                           {"epochs", trainer.epochs}};
    content += header.dump();
    content += "\n";
  }

  for (const EpisodeRollouts& episode : episodes) {
    for (std::size_t index = 0; index < episode.rollouts.size(); ++index) {
      const ScoredRollout& scored = episode.rollouts[index];
      ordered_json record;
      record["record"] = "rollout";
      ordered_json meta;
      meta["item_id"] = episode.episode.target_item.item_id;
      meta["country"] = episode.episode.group.country;
      ordered_json attributes = ordered_json::object();
      for (const auto& [name, value] : episode.episode.group.attributes) {
        attributes[name] = value;
      }
      meta["attributes"] = attributes;
      ordered_json evidence_ids = ordered_json::array();
      for (const RetrievedEntry& entry : episode.episode.evidence.entries) {
        evidence_ids.push_back(entry.item_id);
      }
      meta["evidence_item_ids"] = evidence_ids;
      meta["gold_distribution"] = distribution_to_json(episode.episode.gold_distribution);
      record["episode"] = meta;
      record["rollout_index"] = index;
      record["prompts"] = {
          {"stage_a", scored.rollout.stage_a ? ordered_json(scored.rollout.stage_a->prompt)
                                             : ordered_json(nullptr)},
          {"stage_b", scored.rollout.stage_b.prompt}};
      record["completions"] = {
          {"stage_a", scored.rollout.stage_a ? ordered_json(scored.rollout.stage_a->raw_text)
                                             : ordered_json(nullptr)},
          {"stage_b", scored.rollout.stage_b.raw_text}};
      record["reward"] = breakdown_to_json(scored.breakdown);
      record["advantage"] = episode.advantages.advantages[index];
      content += record.dump();
      content += "\n";
    }
  }
  write_file(path, content);
}

}  // namespace evida
