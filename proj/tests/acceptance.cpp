// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "evida/errors.hpp"
#include "evida/eval.hpp"
#include "evida/evidence_bank.hpp"
#include "evida/inference.hpp"
#include "evida/llm.hpp"
#include "evida/retrieval.hpp"
#include "evida/rewards.hpp"
#include "evida/util.hpp"
#include "testutil.hpp"

using namespace evida;
using Clock = std::chrono::steady_clock;

namespace {

struct Harness {
  int failures = 0;

  void report(int number, const std::string& name, bool passed, const std::string& detail) {
    std::cout << (passed ? "PASS" : "FAIL") << " criterion " << number << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!passed) ++failures;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// --- criterion 1 ---------------------------------------------------------

void criterion_bank_oracle(Harness& harness) {
  const auto start = Clock::now();
  const auto data = testutil::make_synthetic_data(200, {"A-land", "B-land"}, 5, 616);
  const EvidenceBank bank = build_bank(data.records, data.items, {0.33, 0.67});

  bool ok = true;
  std::string detail;
  for (const auto& [group, group_evidence] : bank.groups) {
    for (const SurveyItem& item : data.items) {
      const auto oracle = testutil::oracle_tally(data.records, group, item);
      const ItemEvidence* evidence = bank.find_item(group, item.item_id);
      if (oracle.support == 0) {
        if (evidence != nullptr) { ok = false; detail = "entry for zero support"; }
        continue;
      }
      if (evidence == nullptr || evidence->support != oracle.support) {
        ok = false;
        detail = "support mismatch on " + item.item_id;
        continue;
      }
      for (const SurveyOption& option : item.options) {
        const auto it = oracle.options.find(option.id);
        const std::int64_t expected = it == oracle.options.end() ? 0 : it->second.count;
        const OptionEvidence& option_evidence = evidence->option_evidence.at(option.id);
        if (option_evidence.count != expected) {
          ok = false;
          detail = "count mismatch on " + item.item_id + "/" + option.id;
        }
        const double probability = evidence->distribution.at(option.id);
        if (probability != static_cast<double>(expected) / static_cast<double>(oracle.support)) {
          ok = false;
          detail = "probability not exactly count/support";
        }
        if (expected > 0) {
          for (std::size_t d = 0; d < kSubIndexCount; ++d) {
            if (std::abs((*option_evidence.mean_profile)[d] - it->second.mean[d]) > 1e-12) {
              ok = false;
              detail = "mean profile off beyond 1e-12";
            }
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    ok = false;
    detail = "runtime " + std::to_string(elapsed) + "s";
  }
  std::ostringstream summary;
  summary << "200 respondents, 2 groups, 5 items, " << elapsed << "s";
  harness.report(1, "evidence bank equals brute-force tally", ok,
                 ok ? summary.str() : detail);
}

// --- criterion 2 ---------------------------------------------------------

void criterion_discretization(Harness& harness) {
  const DiscretizationThresholds thresholds{0.33, 0.67};
  std::uint64_t state = 8675309;
  std::vector<double> samples = {0.0, 0.33, 0.67, 1.0};
  for (int i = 0; i < 10000; ++i) samples.push_back(testutil::unit_draw(state));

  bool ok = true;
  std::string detail;
  for (double value : samples) {
    if (discretize_scalar(value, thresholds) != testutil::oracle_lmh(value, 0.33, 0.67)) {
      ok = false;
      detail = "piecewise mismatch at " + std::to_string(value);
      break;
    }
  }
  // Monotone over every sampled pair.
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; ok && i + 1 < sorted.size(); ++i) {
    if (static_cast<int>(discretize_scalar(sorted[i], thresholds)) >
        static_cast<int>(discretize_scalar(sorted[i + 1], thresholds))) {
      ok = false;
      detail = "monotonicity violated";
    }
  }
  harness.report(2, "discretization matches the piecewise map", ok,
                 ok ? "10,004 samples incl. boundaries" : detail);
}

// --- criterion 3 ---------------------------------------------------------

void criterion_jsd(Harness& harness) {
  std::uint64_t state = 13;
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    AnswerDistribution p;
    AnswerDistribution q;
    const int size = 2 + static_cast<int>(testutil::unit_draw(state) * 5);
    double sum_p = 0.0;
    double sum_q = 0.0;
    for (int i = 0; i < size; ++i) {
      const std::string key(1, static_cast<char>('A' + i));
      p[key] = 1e-9 + testutil::unit_draw(state);
      q[key] = 1e-9 + testutil::unit_draw(state);
      sum_p += p[key];
      sum_q += q[key];
    }
    for (auto& [key, value] : p) value /= sum_p;
    for (auto& [key, value] : q) value /= sum_q;

    const double forward = jsd(p, q);
    if (std::abs(forward - jsd(q, p)) > 1e-12) { ok = false; detail = "asymmetry"; }
    if (jsd(p, p) > 1e-12) { ok = false; detail = "jsd(p,p) != 0"; }
    if (forward < 0.0 || forward > 1.0) { ok = false; detail = "out of range"; }
  }
  if (jsd({{"A", 1.0}}, {{"B", 1.0}}) != 1.0) {
    ok = false;
    detail = "disjoint masses not exactly 1";
  }
  const double spot = jsd({{"A", 0.5}, {"B", 0.5}}, {{"A", 1.0}});
  const double oracle = testutil::oracle_jsd({{"A", 0.5}, {"B", 0.5}}, {{"A", 1.0}});
  if (std::abs(spot - oracle) > 1e-6) {
    ok = false;
    detail = "spot value off: " + std::to_string(spot);
  }
  harness.report(3, "JSD symmetry, bounds, and spot value", ok,
                 ok ? "1,000 random pairs" : detail);
}

// --- criterion 4 ---------------------------------------------------------

void criterion_rewards(Harness& harness) {
  const RewardWeights weights{0.25, 0.45, 0.15, 0.15};
  std::uint64_t state = 99;
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 100; ++trial) {
    const double r_lmh = testutil::unit_draw(state);
    const double r_dist = testutil::unit_draw(state);
    const int sa = testutil::unit_draw(state) < 0.5 ? 0 : 1;
    const int sb = testutil::unit_draw(state) < 0.5 ? 0 : 1;
    const double expected = 0.25 * r_lmh + 0.45 * r_dist + 0.15 * sa + 0.15 * sb;
    if (combine(weights, r_lmh, r_dist, sa, sb) != expected) {
      ok = false;
      detail = "weighted sum not exact";
      break;
    }
  }

  // Schema rewards against the 30-fixture corpus of model outputs.
  const SurveyItem question = [] {
    SurveyItem item;
    item.item_id = "T";
    item.question_text = "q";
    item.options = {{"A", "agree"}, {"B", "disagree"}};
    return item;
  }();
  std::size_t corpus_size = 0;
  const std::string corpus =
      read_file(testutil::fixture_dir() / "schema_corpus.jsonl");
  for_each_line(corpus, [&](std::size_t line_number, std::string_view line) {
    if (trim(line).empty()) return;
    ++corpus_size;
    const auto fixture = nlohmann::json::parse(line);
    const std::string stage = fixture.at("stage").get<std::string>();
    const std::string text = fixture.at("text").get<std::string>();
    const bool expect_valid = fixture.at("expect_valid").get<bool>();

    ValidationReport report;
    if (stage == "A") {
      auto parsed = parse_stage_a(text);
      report = std::holds_alternative<ParseFailure>(parsed)
                   ? ValidationReport::for_parse_failure(std::get<ParseFailure>(parsed))
                   : validate_stage_a(std::get<StageAOutput>(parsed), question);
    } else {
      auto parsed = parse_stage_b(text);
      report = std::holds_alternative<ParseFailure>(parsed)
                   ? ValidationReport::for_parse_failure(std::get<ParseFailure>(parsed))
                   : validate_stage_b(std::get<StageBOutput>(parsed), question, 0.01);
    }
    const int reward = reward_schema(report);
    if (reward != (expect_valid ? 1 : 0) || report.valid != expect_valid) {
      ok = false;
      detail = "fixture line " + std::to_string(line_number) + " scored " +
               std::to_string(reward) + ", expected " + std::to_string(expect_valid ? 1 : 0);
    }
  });
  if (corpus_size != 30) {
    ok = false;
    detail = "corpus has " + std::to_string(corpus_size) + " fixtures, expected 30";
  }
  harness.report(4, "reward combination and schema rewards", ok,
                 ok ? "100 tuples, 30 fixtures" : detail);
}

// --- criterion 5 ---------------------------------------------------------

void criterion_retrieval(Harness& harness) {
  bool ok = true;
  std::string detail;

  // 20-item bank with enough support everywhere.
  std::vector<SurveyItem> items;
  std::vector<RespondentRecord> records;
  const GroupKey group{"Testland", {}};
  for (int i = 0; i < 20; ++i) {
    SurveyItem item = testutil::make_item("Q" + std::to_string(i), "", 3);
    item.question_text = "theme" + std::to_string(i % 4) + " subject matter variant " +
                         std::to_string(i);
    items.push_back(item);
  }
  std::uint64_t state = 31337;
  for (int r = 0; r < 40; ++r) {
    RespondentRecord record;
    record.respondent_id = "R" + std::to_string(r);
    record.group = group;
    record.profile = testutil::random_profile(state);
    for (const SurveyItem& item : items) {
      record.answers[item.item_id] = item.options[r % 3].id;
    }
    records.push_back(std::move(record));
  }
  const EvidenceBank bank = build_bank(records, items, {0.33, 0.67});
  HashingEncoder encoder(4242);

  RetrievalQuery query;
  query.question_text = "theme1 subject matter variant";
  query.group = group;
  query.k = 10;
  query.n_min = 0;
  const RetrievedEvidence result = retrieve(query, bank, encoder);

  // Brute-force full-sort oracle.
  const auto query_embedding = encoder.embed({query.question_text})[0];
  std::vector<std::pair<double, std::string>> oracle;
  for (const auto& [item_id, evidence] : bank.find_group(group)->items) {
    oracle.emplace_back(cosine(query_embedding, encoder.embed({item_text(evidence.item)})[0]),
                        item_id);
  }
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (result.entries.size() != 10) {
    ok = false;
    detail = "expected 10 entries, got " + std::to_string(result.entries.size());
  }
  for (std::size_t i = 0; ok && i < result.entries.size(); ++i) {
    if (result.entries[i].item_id != oracle[i].second ||
        std::abs(result.entries[i].score - oracle[i].first) > 1e-12) {
      ok = false;
      detail = "rank " + std::to_string(i) + " differs from full-sort oracle";
    }
  }

  // Filter-after-truncate: drop the support of the items inside the top-10
  // window below the floor; no item from outside the window may appear.
  std::set<std::string> top_window;
  for (std::size_t i = 0; i < 10; ++i) top_window.insert(oracle[i].second);
  EvidenceBank filtered_bank = bank;
  GroupEvidence& group_evidence = filtered_bank.groups.at(group);
  for (auto& [item_id, evidence] : group_evidence.items) {
    if (top_window.count(item_id) > 0) {
      evidence.support = 5;  // below the floor
    }
  }
  RetrievalQuery filtered_query = query;
  filtered_query.n_min = 10;
  const RetrievedEvidence filtered = retrieve(filtered_query, filtered_bank, encoder);
  if (!filtered.entries.empty()) {
    ok = false;
    detail = "support filter promoted an item from outside the top-k";
  }

  if (RetrievalQuery{}.k != 10) {
    ok = false;
    detail = "default k is not 10";
  }
  harness.report(5, "retrieval protocol (top-k then support filter)", ok,
                 ok ? "20-item bank vs full sort" : detail);
}

// --- criterion 6 ---------------------------------------------------------

void criterion_episodes(Harness& harness) {
  const auto data = testutil::make_synthetic_data(240, {"A-land", "B-land"}, 8, 5150);
  const EvidenceBank bank = build_bank(data.records, data.items, {0.33, 0.67});
  HashingEncoder encoder(6);

  EpisodeRetrievalConfig config;
  config.k = 5;
  config.n_min = 20;

  bool ok = true;
  std::string detail;
  int built = 0;
  for (int round = 0; round < 100; ++round) {
    const GroupKey group{round % 2 == 0 ? "A-land" : "B-land", {}};
    const std::string item_id = "Q" + std::to_string(1 + (round % 8));
    Episode episode;
    try {
      episode = build_episode(bank, group, item_id, config, encoder);
    } catch (const DomainError&) {
      continue;  // support-starved pair, skipped by design
    }
    ++built;
    for (const RetrievedEntry& entry : episode.evidence.entries) {
      if (entry.item_id == item_id) {
        ok = false;
        detail = "target leaked into evidence";
      }
    }
    const ItemEvidence* target = bank.find_item(group, item_id);
    if (!(episode.gold_distribution == target->distribution)) {
      ok = false;
      detail = "gold distribution differs from bank";
    }
    for (const auto& [option, evidence] : target->option_evidence) {
      const bool has_gold = episode.gold_signatures.count(option) > 0;
      if (evidence.signature.has_value() != has_gold) {
        ok = false;
        detail = "gold signature coverage differs from bank";
      } else if (evidence.signature &&
                 !(episode.gold_signatures.at(option) == *evidence.signature)) {
        ok = false;
        detail = "gold signature differs from bank";
      }
    }
  }
  if (built < 100) {
    ok = false;
    detail = "only " + std::to_string(built) + " episodes built";
  }
  harness.report(6, "episode integrity over 100 episodes", ok,
                 ok ? "exclusion + exact gold copy" : detail);
}

// --- criterion 7 ---------------------------------------------------------

void criterion_advantages(Harness& harness) {
  std::uint64_t state = 24601;
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::vector<double> rewards;
    for (int i = 0; i < 16; ++i) rewards.push_back(testutil::unit_draw(state));
    const GroupAdvantages advantages = group_advantages(rewards);

    double mean = 0.0;
    for (double value : advantages.advantages) mean += value;
    mean /= 16.0;
    double variance = 0.0;
    for (double value : advantages.advantages) variance += (value - mean) * (value - mean);
    variance /= 16.0;
    if (std::abs(mean) > 1e-9) { ok = false; detail = "advantage mean nonzero"; }
    if (std::abs(std::sqrt(variance) - 1.0) > 1e-9) { ok = false; detail = "std not 1"; }
  }
  const GroupAdvantages constant = group_advantages(std::vector<double>(16, 0.42));
  for (double value : constant.advantages) {
    if (value != 0.0) {
      ok = false;
      detail = "constant rewards produced nonzero advantages";
    }
  }
  harness.report(7, "group-relative advantages (G=16)", ok,
                 ok ? "1,000 random groups" : detail);
}

// --- criterion 8 ---------------------------------------------------------

std::string cli_path() {
#ifdef EVIDA_CLI_PATH
  return EVIDA_CLI_PATH;
#else
  return "./build/tools/evida";
#endif
}

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

void criterion_determinism(Harness& harness) {
  bool ok = true;
  std::string detail;
  const auto dir = testutil::temp_dir("acceptance-determinism");

  // Same fixture parameters as the CLI test suite, so the committed golden
  // files apply here too.
  const auto data = testutil::make_synthetic_data(200, {"A-land", "B-land"}, 5, 2024);
  testutil::write_tsv_microdata(data, dir / "micro.tsv");
  testutil::write_items_jsonl(data.items, dir / "items.jsonl");
  const std::string bank = (dir / "bank").string();
  if (run_command("\"" + cli_path() + "\" build-bank --microdata \"" +
                  (dir / "micro.tsv").string() + "\" --items \"" +
                  (dir / "items.jsonl").string() + "\" --out \"" + bank +
                  "\" 2> /dev/null") != 0) {
    harness.report(8, "mock runs are byte-identical", false, "build-bank failed");
    return;
  }

  const std::string predict_args =
      " predict --bank \"" + bank +
      "\" --question \"Synthetic question number 3\" --option \"A=strongly agree\" "
      "--option \"B=agree\" --option \"C=disagree\" --country A-land --mock --seed 7 "
      "--n-min 10 --out ";
  for (const char* name : {"p1.json", "p2.json"}) {
    if (run_command("\"" + cli_path() + "\"" + predict_args + "\"" +
                    (dir / name).string() + "\" 2> /dev/null") != 0) {
      ok = false;
      detail = "predict failed";
    }
  }
  const std::string episodes_args =
      " episodes --bank \"" + bank +
      "\" --groups A-land --count 2 --mock --seed 11 --n-min 10 --group-size 16 --out ";
  for (const char* name : {"e1.jsonl", "e2.jsonl"}) {
    if (run_command("\"" + cli_path() + "\"" + episodes_args + "\"" +
                    (dir / name).string() + "\" 2> /dev/null") != 0) {
      ok = false;
      detail = "episodes failed";
    }
  }

  if (ok) {
    const std::string p1 = read_file(dir / "p1.json");
    if (p1 != read_file(dir / "p2.json")) {
      ok = false;
      detail = "predict outputs differ between runs";
    }
    const std::string e1 = read_file(dir / "e1.jsonl");
    if (e1 != read_file(dir / "e2.jsonl")) {
      ok = false;
      detail = "episode batches differ between runs";
    }
    // Committed goldens (normalized line endings).
    const std::string predict_golden =
        read_file(testutil::fixture_dir() / "golden" / "predict_mock.json");
    if (testutil::normalize_newlines(p1) != testutil::normalize_newlines(predict_golden)) {
      ok = false;
      detail = "predict output differs from the committed golden";
    }
    const std::string episodes_golden =
        read_file(testutil::fixture_dir() / "golden" / "episodes_mock.jsonl");
    if (testutil::normalize_newlines(e1) != testutil::normalize_newlines(episodes_golden)) {
      ok = false;
      detail = "episode batch differs from the committed golden";
    }
  }
  std::filesystem::remove_all(dir);
  harness.report(8, "mock runs are byte-identical and match goldens", ok,
                 ok ? "predict + episodes, two runs each" : detail);
}

// --- criterion 9 ---------------------------------------------------------

// Families of related items; members share tokens and answer distributions,
// so evidence retrieval carries real signal.
struct SmokeWorld {
  std::vector<SurveyItem> items;
  std::vector<RespondentRecord> records;
  EvidenceBank bank;
  std::vector<BenchmarkCase> cases;
};

SmokeWorld build_smoke_world() {
  SmokeWorld world;
  const std::vector<std::string> countries = {"Norland", "Sudland"};
  const std::vector<std::string> topics = {
      "tradition family elders",     "authority rules obedience",
      "equality fairness inclusion", "faith worship belief",
      "choice freedom lifestyle"};
  // More items per family than the retrieval depth k=10, so a well-ranked
  // evidence window can stay within one family.
  const int families = 5;
  const int per_family = 12;
  const int respondents_per_country = 60;

  for (int family = 0; family < families; ++family) {
    for (int variant = 0; variant < per_family; ++variant) {
      SurveyItem item = testutil::make_item(
          "S" + std::to_string(family) + "_" + std::to_string(variant), "", 4);
      item.question_text = "How strongly do people value " + topics[family] +
                           " in situation " + std::to_string(variant) + "?";
      world.items.push_back(item);
    }
  }

  // Family base distributions, reversed for the second country; realized
  // exactly by quota assignment so the bank's empirical distribution equals
  // the intended one.
  const double base[5][4] = {{0.55, 0.25, 0.15, 0.05},
                             {0.10, 0.60, 0.20, 0.10},
                             {0.30, 0.40, 0.20, 0.10},
                             {0.05, 0.15, 0.30, 0.50},
                             {0.25, 0.25, 0.40, 0.10}};
  auto counts_for = [&](int family, int country) {
    std::array<int, 4> counts{};
    int assigned = 0;
    for (int option = 0; option < 4; ++option) {
      const double probability =
          country == 0 ? base[family][option] : base[family][3 - option];
      counts[option] = static_cast<int>(std::lround(probability * respondents_per_country));
      assigned += counts[option];
    }
    counts[0] += respondents_per_country - assigned;  // fix rounding drift
    return counts;
  };

  for (int country = 0; country < 2; ++country) {
    for (int r = 0; r < respondents_per_country; ++r) {
      RespondentRecord record;
      record.respondent_id = countries[country] + "-" + std::to_string(r);
      record.group.country = countries[country];
      std::array<double, kSubIndexCount> profile{};
      for (std::size_t d = 0; d < kSubIndexCount; ++d) {
        profile[d] = std::fmod(0.13 + 0.618 * r + 0.17 * static_cast<double>(d), 1.0);
      }
      record.profile = WelzelProfile::from_values(profile);
      for (const SurveyItem& item : world.items) {
        const int family = item.item_id[1] - '0';
        const auto counts = counts_for(family, country);
        int cumulative = 0;
        for (int option = 0; option < 4; ++option) {
          cumulative += counts[option];
          if (r < cumulative) {
            record.answers[item.item_id] = item.options[option].id;
            break;
          }
        }
      }
      world.records.push_back(std::move(record));
    }
  }
  world.bank = build_bank(world.records, world.items, {0.33, 0.67});

  // 20-question benchmark: ten held-in items per country, gold straight from
  // the bank's empirical distributions.
  for (int country = 0; country < 2; ++country) {
    for (int i = 0; i < 10; ++i) {
      const SurveyItem& item = world.items[i * 6 % world.items.size()];
      const ItemEvidence* evidence =
          world.bank.find_item(GroupKey{countries[country], {}}, item.item_id);
      BenchmarkCase benchmark_case;
      benchmark_case.case_id = item.item_id;
      benchmark_case.question_text = item.question_text;
      benchmark_case.options = item.options;
      benchmark_case.country = countries[country];
      benchmark_case.gold = evidence->distribution;
      world.cases.push_back(std::move(benchmark_case));
    }
  }
  return world;
}

// Chat-completions endpoint wrapping the deterministic model emulator.
class SmokeServer {
 public:
  SmokeServer() : emulator_(2026) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& request, httplib::Response& response) {
                   const auto body = nlohmann::json::parse(request.body);
                   const std::string prompt =
                       body.at("messages").at(0).at("content").get<std::string>();
                   const Completion completion =
                       emulator_.complete(prompt, DecodingParams{}, false);
                   nlohmann::json payload = {
                       {"choices",
                        {{{"message",
                           {{"role", "assistant"}, {"content", completion.text}}}}}}};
                   response.set_content(payload.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~SmokeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  SyntheticLLMClient emulator_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// Accounts the time spent inside the endpoint, separating it from pipeline
// overhead.
class TimingLLM : public LLMClient {
 public:
  explicit TimingLLM(LLMClient& inner) : inner_(inner) {}
  std::string identity() const override { return inner_.identity(); }
  bool supports_logprobs() const override { return inner_.supports_logprobs(); }
  Completion complete(const std::string& prompt, const DecodingParams& decoding,
                      bool want_logprobs) override {
    const auto start = Clock::now();
    Completion completion = inner_.complete(prompt, decoding, want_logprobs);
    endpoint_seconds += seconds_since(start);
    return completion;
  }
  double endpoint_seconds = 0.0;

 private:
  LLMClient& inner_;
};

void criterion_smoke(Harness& harness) {
  bool ok = true;
  std::string detail;
  try {
    const SmokeWorld world = build_smoke_world();
    HashingEncoder encoder(9090);

    // Default: a live local chat-completions server; EVIDA_SMOKE_BASE_URL
    // points the run at an external endpoint instead.
    std::unique_ptr<SmokeServer> local;
    HttpChatConfig chat_config;
    chat_config.model = getenv_or("EVIDA_SMOKE_MODEL", "emulated-model");
    const std::string external = getenv_or("EVIDA_SMOKE_BASE_URL", "");
    if (external.empty()) {
      local = std::make_unique<SmokeServer>();
      chat_config.base_url = local->base_url();
    } else {
      chat_config.base_url = external;
    }
    HttpChatClient chat(chat_config);
    TimingLLM timed(chat);

    TwoStageConfig config;
    config.k = 10;
    config.n_min = 30;

    const auto wall_start = Clock::now();
    const Predictor evida_predictor = [&](const BenchmarkCase& benchmark_case) {
      const PredictionResult result =
          run_two_stage(benchmark_case.as_item(), benchmark_case.group(), world.bank, encoder,
                        timed, config);
      return result.normalized_distribution;
    };
    const MethodResult evida_result = evaluate("evida", evida_predictor, world.cases);
    const double wall = seconds_since(wall_start);

    const MethodResult uniform_result = evaluate(
        "uniform",
        [](const BenchmarkCase& c) { return std::optional(uniform_prediction(c)); },
        world.cases);

    const double overhead_per_question =
        (wall - timed.endpoint_seconds) / static_cast<double>(world.cases.size());

    const auto report_dir = testutil::temp_dir("smoke-report");
    write_reports({evida_result, uniform_result}, world.cases, report_dir);

    if (evida_result.validity_rate < 0.95) {
      ok = false;
      detail = "validity " + std::to_string(evida_result.validity_rate);
    } else if (!(evida_result.mean_jsd < uniform_result.mean_jsd)) {
      ok = false;
      detail = "mean JSD " + std::to_string(evida_result.mean_jsd) + " not below uniform " +
               std::to_string(uniform_result.mean_jsd);
    } else if (overhead_per_question >= 1.0) {
      ok = false;
      detail = "pipeline overhead " + std::to_string(overhead_per_question) + "s/question";
    } else {
      std::ostringstream summary;
      summary << "validity " << evida_result.validity_rate << ", mean JSD "
              << evida_result.mean_jsd << " vs uniform " << uniform_result.mean_jsd
              << ", overhead " << overhead_per_question << "s/question, report in "
              << (report_dir / "report.md").string();
      detail = summary.str();
    }
    if (ok) {
      harness.report(9, "20-question smoke benchmark against a live endpoint", true, detail);
      return;
    }
  } catch (const std::exception& ex) {
    ok = false;
    detail = ex.what();
  }
  harness.report(9, "20-question smoke benchmark against a live endpoint", false, detail);
}

}  // namespace

int main() {
  Harness harness;
  criterion_bank_oracle(harness);
  criterion_discretization(harness);
  criterion_jsd(harness);
  criterion_rewards(harness);
  criterion_retrieval(harness);
  criterion_episodes(harness);
  criterion_advantages(harness);
  criterion_determinism(harness);
  criterion_smoke(harness);

  std::cout << (harness.failures == 0 ? "ALL CRITERIA PASSED"
                                      : std::to_string(harness.failures) + " CRITERIA FAILED")
            << "\n";
  return harness.failures;
}
