#include <doctest.h>

#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/rewards.hpp"
#include "testutil.hpp"

using namespace evida;

namespace {

LMHSignature uniform_signature(LMHLabel label) {
  LMHSignature signature;
  signature.labels.fill(label);
  return signature;
}

const RewardWeights kPaperWeights{0.25, 0.45, 0.15, 0.15};

}  // namespace

TEST_CASE("reward_lmh counts per-dimension matches over gold options") {
  std::map<std::string, LMHSignature> gold = {{"A", uniform_signature(LMHLabel::low)},
                                              {"B", uniform_signature(LMHLabel::high)}};
  CHECK(reward_lmh(gold, gold) == 1.0);

  // 8 of 16 positions match: option A fully, option B not at all.
  std::map<std::string, LMHSignature> half = {{"A", uniform_signature(LMHLabel::low)},
                                              {"B", uniform_signature(LMHLabel::medium)}};
  CHECK(reward_lmh(half, gold) == doctest::Approx(0.5));

  // Extra predicted option without gold (zero support) is ignored.
  std::map<std::string, LMHSignature> extra = half;
  extra["C"] = uniform_signature(LMHLabel::low);
  CHECK(reward_lmh(extra, gold) == doctest::Approx(0.5));

  // Missing gold option is a scoring error.
  std::map<std::string, LMHSignature> missing = {{"A", uniform_signature(LMHLabel::low)}};
  CHECK_THROWS_AS(reward_lmh(missing, gold), DomainError);
  CHECK_THROWS_AS(reward_lmh(gold, {}), DomainError);
}

TEST_CASE("reward_lmh matches a brute-force double loop on random maps") {
  std::uint64_t state = 314;
  auto random_signature = [&]() {
    LMHSignature signature;
    for (auto& label : signature.labels) {
      const double u = testutil::unit_draw(state);
      label = u < 1.0 / 3 ? LMHLabel::low : (u < 2.0 / 3 ? LMHLabel::medium : LMHLabel::high);
    }
    return signature;
  };

  for (int trial = 0; trial < 50; ++trial) {
    std::map<std::string, LMHSignature> predicted;
    std::map<std::string, LMHSignature> gold;
    const int options = 2 + static_cast<int>(testutil::unit_draw(state) * 4);
    for (int o = 0; o < options; ++o) {
      const std::string id(1, static_cast<char>('A' + o));
      predicted[id] = random_signature();
      gold[id] = random_signature();
    }
    // Independent oracle: plain double loop over options and dimensions.
    int matches = 0;
    for (const auto& [id, gold_signature] : gold) {
      for (std::size_t d = 0; d < kSubIndexCount; ++d) {
        if (predicted.at(id).labels[d] == gold_signature.labels[d]) ++matches;
      }
    }
    const double expected =
        static_cast<double>(matches) / (static_cast<double>(gold.size()) * 8.0);
    CHECK(reward_lmh(predicted, gold) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("jsd identities and spot value") {
  const AnswerDistribution p = {{"A", 0.5}, {"B", 0.5}};
  CHECK(jsd(p, p) == 0.0);

  // Disjoint point masses reach the base-2 maximum exactly.
  CHECK(jsd({{"A", 1.0}}, {{"B", 1.0}}) == 1.0);

  const double spot = jsd({{"A", 0.5}, {"B", 0.5}}, {{"A", 1.0}});
  CHECK(spot == doctest::Approx(testutil::oracle_jsd({{"A", 0.5}, {"B", 0.5}}, {{"A", 1.0}}))
                    .epsilon(1e-6));
  CHECK(spot == doctest::Approx(0.3112781244591328).epsilon(1e-6));

  CHECK_THROWS_AS(jsd({{"A", 0.9}}, p), DomainError);
}

TEST_CASE("jsd is symmetric, bounded, and zero on self for random pairs") {
  std::uint64_t state = 2718;
  for (int trial = 0; trial < 300; ++trial) {
    AnswerDistribution p;
    AnswerDistribution q;
    const int size = 2 + static_cast<int>(testutil::unit_draw(state) * 5);
    double sum_p = 0.0;
    double sum_q = 0.0;
    for (int i = 0; i < size; ++i) {
      const std::string key(1, static_cast<char>('A' + i));
      p[key] = testutil::unit_draw(state);
      q[key] = testutil::unit_draw(state);
      sum_p += p[key];
      sum_q += q[key];
    }
    for (auto& [key, value] : p) value /= sum_p;
    for (auto& [key, value] : q) value /= sum_q;

    const double forward = jsd(p, q);
    const double backward = jsd(q, p);
    CHECK(std::abs(forward - backward) < 1e-12);
    CHECK(forward >= 0.0);
    CHECK(forward <= 1.0);
    CHECK(jsd(p, p) < 1e-12);
    CHECK(forward == doctest::Approx(testutil::oracle_jsd(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("reward_dist complements jsd") {
  const AnswerDistribution gold = {{"A", 0.25}, {"B", 0.75}};
  CHECK(reward_dist(gold, gold) == doctest::Approx(1.0));
  CHECK(reward_dist({{"A", 1.0}}, {{"B", 1.0}}) == doctest::Approx(0.0));
}

TEST_CASE("schema rewards are binary and follow the report") {
  ValidationReport valid = ValidationReport::from_checks({{"x", true, ""}});
  ValidationReport invalid = ValidationReport::from_checks({{"x", true, ""}, {"y", false, ""}});
  CHECK(reward_schema(valid) == 1);
  CHECK(reward_schema(invalid) == 0);
  CHECK(reward_schema(ValidationReport::for_parse_failure(
            {ParseFailureKind::no_json, "nothing"})) == 0);
}

TEST_CASE("combine is the exact weighted sum") {
  CHECK(combine(kPaperWeights, 1.0, 1.0, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(combine(kPaperWeights, 0.5, 0.8, 1, 1) == doctest::Approx(0.785).epsilon(1e-15));
  CHECK(combine(kPaperWeights, 0.0, 0.0, 0, 0) == 0.0);

  std::uint64_t state = 55;
  for (int trial = 0; trial < 100; ++trial) {
    const double r_lmh = testutil::unit_draw(state);
    const double r_dist = testutil::unit_draw(state);
    const int sa = testutil::unit_draw(state) < 0.5 ? 0 : 1;
    const int sb = testutil::unit_draw(state) < 0.5 ? 0 : 1;
    const double expected = 0.25 * r_lmh + 0.45 * r_dist + 0.15 * sa + 0.15 * sb;
    CHECK(combine(kPaperWeights, r_lmh, r_dist, sa, sb) == expected);
  }
}

TEST_CASE("reward weights validate") {
  CHECK_THROWS_AS((RewardWeights{-0.1, 0.5, 0.2, 0.2}.validate()), DomainError);
  CHECK_THROWS_AS((RewardWeights{0, 0, 0, 0}.validate()), DomainError);
  CHECK_NOTHROW(kPaperWeights.validate());
}

TEST_CASE("build_episode excludes the target and copies gold exactly") {
  const auto data = testutil::make_synthetic_data(150, {"A-land", "B-land"}, 6, 97);
  const EvidenceBank bank = build_bank(data.records, data.items, {0.33, 0.67});
  HashingEncoder encoder(13);
  const GroupKey group{"A-land", {}};

  EpisodeRetrievalConfig config;
  config.k = 4;
  config.n_min = 10;

  const Episode episode = build_episode(bank, group, "Q3", config, encoder);
  CHECK(episode.target_item.item_id == "Q3");
  for (const RetrievedEntry& entry : episode.evidence.entries) {
    CHECK(entry.item_id != "Q3");
  }

  const ItemEvidence* target = bank.find_item(group, "Q3");
  REQUIRE(target != nullptr);
  CHECK(episode.gold_distribution == target->distribution);
  for (const auto& [option, evidence] : target->option_evidence) {
    if (evidence.signature) {
      CHECK(episode.gold_signatures.at(option) == *evidence.signature);
    } else {
      CHECK(episode.gold_signatures.count(option) == 0);
    }
  }

  // The evidence equals a manual retrieve() with the same exclusion set.
  RetrievalQuery query;
  query.question_text = target->item.question_text;
  query.instruction = target->item.instruction;
  query.group = group;
  query.k = config.k;
  query.n_min = config.n_min;
  query.exclude_item_ids = {"Q3"};
  const RetrievedEvidence manual = retrieve(query, bank, encoder);
  REQUIRE(episode.evidence.entries.size() == manual.entries.size());
  for (std::size_t i = 0; i < manual.entries.size(); ++i) {
    CHECK(episode.evidence.entries[i].item_id == manual.entries[i].item_id);
    CHECK(episode.evidence.entries[i].score == manual.entries[i].score);
  }

  // Insufficient support is a skip, not a crash.
  config.n_min = 100000;
  CHECK_THROWS_AS(build_episode(bank, group, "Q3", config, encoder), DomainError);
  CHECK_THROWS_AS(build_episode(bank, group, "missing-item", config, encoder), DomainError);
}

TEST_CASE("score_rollout zeroes r_dist for invalid stage B") {
  Episode episode;
  episode.target_item = testutil::make_item("T", "q", 2);
  episode.group = GroupKey{"X", {}};
  episode.gold_distribution = {{"A", 0.5}, {"B", 0.5}};
  episode.gold_signatures = {{"A", uniform_signature(LMHLabel::low)},
                             {"B", uniform_signature(LMHLabel::high)}};

  PredictionResult rollout;
  rollout.item_id = "T";
  rollout.group = episode.group;
  rollout.stage_b.report = ValidationReport::for_parse_failure(
      {ParseFailureKind::no_json, "prose only"});

  StageAResult stage_a;
  stage_a.report = ValidationReport::from_checks({{"ok", true, ""}});
  StageAOutput output;
  for (std::string_view name : kSubIndexNames) {
    output.subindex_order.emplace_back(name);
  }
  output.option_profiles.push_back({"A", uniform_signature(LMHLabel::low).to_strings()});
  output.option_profiles.push_back({"B", uniform_signature(LMHLabel::high).to_strings()});
  stage_a.output = output;
  rollout.stage_a = stage_a;

  const RewardBreakdown breakdown = score_rollout(episode, rollout, kPaperWeights);
  CHECK(breakdown.r_lmh == 1.0);
  CHECK(breakdown.r_dist == 0.0);
  CHECK(breakdown.r_schema_a == 1);
  CHECK(breakdown.r_schema_b == 0);
  CHECK(breakdown.total == doctest::Approx(0.25 + 0.15));

  // Identical input scores identically (purity).
  const RewardBreakdown again = score_rollout(episode, rollout, kPaperWeights);
  CHECK(again.total == breakdown.total);
}

TEST_CASE("group advantages normalize to zero mean and unit population std") {
  CHECK_THROWS_AS(group_advantages({1.0}), DomainError);

  const GroupAdvantages constant = group_advantages({0.7, 0.7, 0.7, 0.7});
  for (double advantage : constant.advantages) CHECK(advantage == 0.0);

  const GroupAdvantages pair = group_advantages({0.0, 1.0});
  CHECK(pair.advantages[0] == doctest::Approx(-1.0));
  CHECK(pair.advantages[1] == doctest::Approx(1.0));

  std::uint64_t state = 404;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> rewards;
    for (int i = 0; i < 16; ++i) rewards.push_back(testutil::unit_draw(state));
    const GroupAdvantages advantages = group_advantages(rewards);

    double mean = 0.0;
    for (double a : advantages.advantages) mean += a;
    mean /= 16.0;
    double variance = 0.0;
    for (double a : advantages.advantages) variance += (a - mean) * (a - mean);
    variance /= 16.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(variance) - 1.0) < 1e-9);
  }
}

TEST_CASE("training batch export writes a header plus G records per episode") {
  const auto data = testutil::make_synthetic_data(120, {"A-land"}, 4, 31);
  const EvidenceBank bank = build_bank(data.records, data.items, {0.33, 0.67});
  HashingEncoder encoder(2);
  SyntheticLLMClient llm(21);
  const GroupKey group{"A-land", {}};

  EpisodeRetrievalConfig retrieval;
  retrieval.k = 3;
  retrieval.n_min = 10;
  const int group_size = 16;

  std::vector<EpisodeRollouts> episodes;
  for (const char* item_id : {"Q1", "Q2"}) {
    EpisodeRollouts rollouts;
    rollouts.episode = build_episode(bank, group, item_id, retrieval, encoder);
    std::vector<double> rewards;
    for (int i = 0; i < group_size; ++i) {
      const PredictionResult rollout = run_two_stage_with_evidence(
          rollouts.episode.target_item, group, rollouts.episode.group_profile,
          rollouts.episode.evidence, llm, TwoStageConfig{});
      ScoredRollout scored{rollout,
                           score_rollout(rollouts.episode, rollout, kPaperWeights)};
      rewards.push_back(scored.breakdown.total);
      rollouts.rollouts.push_back(std::move(scored));
    }
    rollouts.advantages = group_advantages(rewards);
    episodes.push_back(std::move(rollouts));
  }

  const auto dir = testutil::temp_dir("batch-export");
  const auto path = dir / "batch.jsonl";
  export_training_batch(episodes, kPaperWeights, group_size, {0.33, 0.67}, 77, path);

  std::vector<nlohmann::json> lines;
  evida::for_each_line(read_file(path), [&](std::size_t, std::string_view line) {
    if (!evida::trim(line).empty()) lines.push_back(nlohmann::json::parse(line));
  });
  REQUIRE(lines.size() == 1 + 2 * group_size);
  CHECK(lines[0].at("record") == "header");
  CHECK(lines[0].at("group_size") == group_size);
  CHECK(lines[0].at("reward_weights").at("dist") == doctest::Approx(0.45));
  CHECK(lines[0].at("optimizer").at("clip_epsilon") == doctest::Approx(0.2));
  CHECK(lines[0].at("optimizer").at("kl_coefficient") == doctest::Approx(0.04));
  CHECK(lines[0].at("optimizer").at("learning_rate") == doctest::Approx(1e-6));
  CHECK(lines[0].at("optimizer").at("batch_size") == 32);

  // Round trip recovers every total exactly.
  std::size_t index = 1;
  for (const EpisodeRollouts& episode : episodes) {
    for (const ScoredRollout& scored : episode.rollouts) {
      CHECK(lines[index].at("reward").at("total").get<double>() == scored.breakdown.total);
      ++index;
    }
  }

  // Incomplete groups are refused.
  episodes[0].rollouts.pop_back();
  CHECK_THROWS_AS(
      export_training_batch(episodes, kPaperWeights, group_size, {0.33, 0.67}, 77, path),
      InputError);
  std::filesystem::remove_all(dir);
}
